#pragma once

#include <memory>
#include <string>
#include <utility>

#include "acns/config.hpp"
#include "acns/diagnostics.hpp"
#include "acns/pressure.hpp"

namespace acns {

inline constexpr const char* kCodeVersion = "0.1.0";

// Owning bundle built from a RunConfig; System views into it.
struct BuiltSystem {
    BasisPtr basis;
    std::unique_ptr<RegularizedPotential> potential;
    NoiseModel noise;

    System system() const { return {basis, potential.get(), &noise}; }
};

BuiltSystem build_system(const RunConfig& cfg);
BuiltSystem build_system_with_seed(const RunConfig& cfg, uint64_t seed);

std::pair<VectorField, ScalarField> build_initial(const RunConfig& cfg, const BasisPtr& basis);

uint64_t derive_member_seed(uint64_t base_seed, int member);
// ensemble.workers, overridden by the ACNS_WORKERS environment variable
int effective_workers(const RunConfig& cfg);

// Exit codes: 0 success (and verdict pass where applicable), 1 verdict fail,
// 2 configuration error, 3 blow-up or member failure.
int run_single(const RunConfig& cfg, const std::string& out_dir);
int run_ensemble(const RunConfig& cfg, const std::string& out_dir);
int run_dependence(const RunConfig& cfg, const std::string& out_dir);
int run_pressure(const std::string& trajectory_dir, const std::string& out_dir);
int run_converge(const RunConfig& cfg, const std::string& kind, const std::string& out_dir);

struct EnsembleResult {
    std::vector<std::vector<LedgerRecord>> member_records;
    EnergyVerdict verdict;
    double bias_coeff = 0.0;
};
// Core of the ensemble command (no file output); workers <= 0 means config value.
EnsembleResult ensemble_verify(const RunConfig& cfg, int workers = 0);

// Discretization-bias coefficient fitted from a short fixed-path dt study.
double fit_bias_coefficient(const RunConfig& cfg);

}  // namespace acns
