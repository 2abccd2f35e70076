#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "acns/noise.hpp"
#include "acns/potential.hpp"
#include "acns/spectral.hpp"

namespace acns {

// Unknowns of the coupled system at one time instant. mu is always the
// assembled chemical potential of (u, phi) at the stored lambda; it is
// recomputed after every update, never integrated.
struct FieldState {
    double t = 0.0;
    VectorField u;
    ScalarField phi;
    ScalarField mu;
    double lambda = 0.0;
};

enum class Scheme { semi_implicit_em, fully_explicit_em };

struct StepperConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::semi_implicit_em;
    double max_phase_clip = 1.5;  // diagnostic threshold, never modifies the dynamics
    bool cfl_guard = true;
};

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(int step, double t, const std::string& what)
        : std::runtime_error(what), step(step), t(t) {}
    int step;
    double t;
};

// Everything a step needs; basis and models are immutable and shareable.
struct System {
    BasisPtr basis;
    const RegularizedPotential* potential = nullptr;
    const NoiseModel* noise = nullptr;
};

// Noise increments consumed by the stepper. The aggregated source sums
// fine-level increments so that coarse-dt runs see the same Wiener path.
class IncrementSource {
public:
    virtual ~IncrementSource() = default;
    virtual WienerIncrement at(int64_t step) const = 0;
};

class RngIncrementSource final : public IncrementSource {
public:
    RngIncrementSource(const NoiseModel& model, double dt) : model_(&model), dt_(dt) {}
    WienerIncrement at(int64_t step) const override {
        return sample_increment(*model_, dt_, step);
    }

private:
    const NoiseModel* model_;
    double dt_;
};

class AggregatedIncrementSource final : public IncrementSource {
public:
    AggregatedIncrementSource(const NoiseModel& model, double dt_fine, int factor)
        : model_(&model), dt_fine_(dt_fine), factor_(factor) {}
    WienerIncrement at(int64_t step) const override;

private:
    const NoiseModel* model_;
    double dt_fine_;
    int factor_;
};

// What happened inside one step (used by the energy ledger and pressure recovery).
struct StepData {
    WienerIncrement dw;
    std::vector<double> g1_coeff;  // G1(u^m) dW1 in solenoidal coefficients
    std::vector<double> g2_coeff;  // projected G2_lambda(phi^m) dW2 in scalar coefficients
};

// c_i = alpha_i b_i + projection of F'_lambda(phi) onto mode i.
ScalarField assemble_mu(const System& sys, const ScalarField& phi);

FieldState make_state(const System& sys, VectorField u0, ScalarField phi0);

struct DriftRates {
    VectorField du;   // -A u - B(u,u) + P(mu grad phi)
    ScalarField dphi;  // -(u . grad phi + mu)
};
DriftRates drift(const System& sys, const FieldState& state);

FieldState step(const System& sys, const FieldState& state, const StepperConfig& cfg,
                const WienerIncrement& dw, int step_index, StepData* data = nullptr);

struct TrajectoryStats {
    double sup_u_h2 = 0.0;       // running sup of |u|^2
    double int_u_vsig2 = 0.0;    // int |u|^2_Vsigma dt
    double int_phi_v22 = 0.0;    // int |phi|^2_V2 dt
    double max_phase_abs = 0.0;
    double max_exceed_frac = 0.0;
    int steps = 0;
};

struct SimulateOptions {
    // on_step fires after every step with (previous, next, data, step index)
    std::function<void(const FieldState&, const FieldState&, const StepData&, int)> on_step;
    bool check_initial_range = true;
};

// Runs ceil(T/dt) steps from the given state. Throws BlowUpError on non-finite
// coefficients with the offending step in the report.
FieldState simulate(const System& sys, FieldState state, double T, const StepperConfig& cfg,
                    const IncrementSource& increments, const SimulateOptions& opts = {},
                    TrajectoryStats* stats = nullptr);

}  // namespace acns
