#include "acns/galerkin.hpp"

#include <cmath>

namespace acns {

namespace {

void check_system(const System& sys) {
    if (!sys.basis || !sys.potential || !sys.noise)
        throw std::invalid_argument("system is missing basis, potential, or noise model");
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// projection of F'_lambda(phi); the alpha_i b_i part is added by the caller
ScalarField fprime_projection(const System& sys, const ScalarField& phi) {
    const RegularizedPotential& pot = *sys.potential;
    return lift_pointwise(phi, [&](double x) { return pot.fprime(x); });
}

}  // namespace

WienerIncrement AggregatedIncrementSource::at(int64_t step) const {
    WienerIncrement acc;
    acc.dt = 0.0;
    acc.dw1.assign(model_->k1, 0.0);
    acc.dw2.assign(model_->k2, 0.0);
    for (int j = 0; j < factor_; ++j) {
        WienerIncrement fine = sample_increment(*model_, dt_fine_, step * factor_ + j);
        acc.dt += fine.dt;
        for (int k = 0; k < model_->k1; ++k) acc.dw1[k] += fine.dw1[k];
        for (int k = 0; k < model_->k2; ++k) acc.dw2[k] += fine.dw2[k];
    }
    return acc;
}

ScalarField assemble_mu(const System& sys, const ScalarField& phi) {
    check_system(sys);
    ScalarField mu = fprime_projection(sys, phi);
    const auto& alpha = sys.basis->scalar_eigenvalues();
    for (size_t i = 0; i < mu.coeff.size(); ++i) mu.coeff[i] += alpha[i] * phi.coeff[i];
    return mu;
}

FieldState make_state(const System& sys, VectorField u0, ScalarField phi0) {
    check_system(sys);
    FieldState st;
    st.t = 0.0;
    st.u = std::move(u0);
    st.phi = std::move(phi0);
    st.mu = assemble_mu(sys, st.phi);
    st.lambda = sys.potential->lambda();
    return st;
}

DriftRates drift(const System& sys, const FieldState& state) {
    check_system(sys);
    DriftRates d{VectorField(sys.basis), ScalarField(sys.basis)};
    VectorField adv = nonlinear_B(state.u);
    VectorField kort = korteweg(state.mu, state.phi);
    const auto& beta = sys.basis->stokes_eigenvalues();
    for (size_t k = 0; k < d.du.coeff.size(); ++k)
        d.du.coeff[k] = -beta[k] * state.u.coeff[k] - adv.coeff[k] + kort.coeff[k];
    ScalarField conv = convect(state.u, state.phi);
    for (size_t i = 0; i < d.dphi.coeff.size(); ++i)
        d.dphi.coeff[i] = -(conv.coeff[i] + state.mu.coeff[i]);
    return d;
}

FieldState step(const System& sys, const FieldState& state, const StepperConfig& cfg,
                const WienerIncrement& dw, int step_index, StepData* data) {
    check_system(sys);
    const double dt = dw.dt;
    const auto& basis = *sys.basis;
    const auto& beta = basis.stokes_eigenvalues();
    const auto& alpha = basis.scalar_eigenvalues();

    VectorField g1 = apply_G1(*sys.noise, state.u, dw.dw1);
    ScalarField g2 = apply_G2_lambda(*sys.noise, *sys.potential, state.phi, dw.dw2);

    // explicit pieces at the current level
    VectorField adv = nonlinear_B(state.u);
    VectorField kort = korteweg(state.mu, state.phi);
    ScalarField conv = convect(state.u, state.phi);
    // F'_lambda projection, recovered from the assembled mu = alpha b + <F'_lambda>
    ScalarField fp(sys.basis);
    for (size_t i = 0; i < fp.coeff.size(); ++i)
        fp.coeff[i] = state.mu.coeff[i] - alpha[i] * state.phi.coeff[i];

    FieldState next;
    next.t = state.t + dt;
    next.lambda = state.lambda;
    next.u = VectorField(sys.basis);
    next.phi = ScalarField(sys.basis);

    if (cfg.scheme == Scheme::semi_implicit_em) {
        for (size_t k = 0; k < next.u.coeff.size(); ++k) {
            double expl = -adv.coeff[k] + kort.coeff[k];
            next.u.coeff[k] =
                (state.u.coeff[k] + dt * expl + g1.coeff[k]) / (1.0 + dt * beta[k]);
        }
        for (size_t i = 0; i < next.phi.coeff.size(); ++i) {
            double expl = -(conv.coeff[i] + fp.coeff[i]);
            next.phi.coeff[i] =
                (state.phi.coeff[i] + dt * expl + g2.coeff[i]) / (1.0 + dt * alpha[i]);
        }
    } else {
        for (size_t k = 0; k < next.u.coeff.size(); ++k) {
            double rate = -beta[k] * state.u.coeff[k] - adv.coeff[k] + kort.coeff[k];
            next.u.coeff[k] = state.u.coeff[k] + dt * rate + g1.coeff[k];
        }
        for (size_t i = 0; i < next.phi.coeff.size(); ++i) {
            double rate = -alpha[i] * state.phi.coeff[i] - conv.coeff[i] - fp.coeff[i];
            next.phi.coeff[i] = state.phi.coeff[i] + dt * rate + g2.coeff[i];
        }
    }

    if (!all_finite(next.u.coeff) || !all_finite(next.phi.coeff))
        throw BlowUpError(step_index, next.t, "non-finite coefficient after step " +
                                                  std::to_string(step_index) + " at t = " +
                                                  std::to_string(next.t));

    next.mu = assemble_mu(sys, next.phi);

    if (data) {
        data->dw = dw;
        data->g1_coeff = std::move(g1.coeff);
        data->g2_coeff = std::move(g2.coeff);
    }
    return next;
}

FieldState simulate(const System& sys, FieldState state, double T, const StepperConfig& cfg,
                    const IncrementSource& increments, const SimulateOptions& opts,
                    TrajectoryStats* stats) {
    check_system(sys);
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("stepper requires dt > 0");
    if (cfg.scheme == Scheme::fully_explicit_em && cfg.dt > sys.potential->lambda())
        throw std::invalid_argument("fully explicit stepping requires dt <= lambda");

    if (opts.check_initial_range) {
        GridStats gs = scalar_grid_stats(state.phi);
        if (gs.max_abs > 1.0 + 1e-9)
            throw std::invalid_argument("initial phase exceeds [-1,1] on the grid");
    }

    const int n_steps = static_cast<int>(std::ceil(T / cfg.dt - 1e-12));
    TrajectoryStats local;
    TrajectoryStats& st = stats ? *stats : local;
    {
        double u2 = inner_hsigma(state.u, state.u);
        st.sup_u_h2 = std::max(st.sup_u_h2, u2);
    }
    StepData data;
    for (int m = 0; m < n_steps; ++m) {
        WienerIncrement dw = increments.at(m);
        FieldState next = step(sys, state, cfg, dw, m, &data);

        double u2 = inner_hsigma(next.u, next.u);
        st.sup_u_h2 = std::max(st.sup_u_h2, u2);
        double uv = velocity_norm(next.u, NormKind::Vsigma);
        double pv = scalar_norm(next.phi, NormKind::V2);
        st.int_u_vsig2 += dw.dt * uv * uv;
        st.int_phi_v22 += dw.dt * pv * pv;
        GridStats gs = scalar_grid_stats(next.phi);
        st.max_phase_abs = std::max(st.max_phase_abs, gs.max_abs);
        st.max_exceed_frac = std::max(st.max_exceed_frac, gs.exceed_frac);
        ++st.steps;

        if (opts.on_step) opts.on_step(state, next, data, m);
        state = std::move(next);
    }
    return state;
}

}  // namespace acns
