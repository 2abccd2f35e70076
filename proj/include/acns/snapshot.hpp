#pragma once

#include <string>
#include <vector>

#include "acns/galerkin.hpp"

namespace acns {

// Field snapshot binary format, little-endian:
//   bytes 0..3   magic "ACNS"
//   u32          version (1)
//   u32          flags: bit0 = has velocity block, bit1 = neumann_cosine basis
//   u32          grid_n
//   f64          length
//   f64          dealias_fraction
//   f64          t
//   f64          lambda
//   u64          n_velocity_coefficients
//   u64          n_scalar_coefficients
//   f64[n_vel]   velocity coefficients (basis order)
//   f64[n_sc]    phase coefficients
//   f64[n_sc]    chemical-potential coefficients
// Coefficient order is the basis order: modes sorted by (eigenvalue, k1, k2, part).
void write_state_snapshot(const std::string& path, const FieldState& state);
FieldState read_state_snapshot(const std::string& path, const System& sys);

// Increment dump ("ACNW"): u32 version, u32 k1, u32 k2, u64 n_steps, f64 dt,
// then per step f64 dw1[k1] followed by f64 dw2[k2].
void write_increments(const std::string& path, const std::vector<WienerIncrement>& increments);
std::vector<WienerIncrement> read_increments(const std::string& path);

}  // namespace acns
