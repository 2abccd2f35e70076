#include "acns/pressure.hpp"

#include <cmath>
#include <stdexcept>

namespace acns {

namespace {

// full (u . grad) u as cartesian components, truncated but not projected
CartesianField convection_full(const VectorField& u) {
    const auto& b = *u.basis;
    const size_t ng = b.grid_points();
    std::vector<double> ux(ng), uy(ng), dxux(ng), dyux(ng), dxuy(ng), dyuy(ng);
    b.vector_to_grid(u.coeff.data(), ux.data(), uy.data());
    b.vector_gradient_grid(u.coeff.data(), dxux.data(), dyux.data(), dxuy.data(), dyuy.data());
    std::vector<double> cx(ng), cy(ng);
    for (size_t i = 0; i < ng; ++i) {
        cx[i] = ux[i] * dxux[i] + uy[i] * dyux[i];
        cy[i] = ux[i] * dxuy[i] + uy[i] * dyuy[i];
    }
    CartesianField out{ScalarField(u.basis), ScalarField(u.basis)};
    b.scalar_from_grid(cx.data(), out[0].coeff.data());
    b.scalar_from_grid(cy.data(), out[1].coeff.data());
    return out;
}

CartesianField korteweg_full(const ScalarField& mu, const ScalarField& phi) {
    const auto& b = *mu.basis;
    const size_t ng = b.grid_points();
    std::vector<double> m(ng), gx(ng), gy(ng);
    b.scalar_to_grid(mu.coeff.data(), m.data());
    b.scalar_gradient_grid(phi.coeff.data(), gx.data(), gy.data());
    std::vector<double> fx(ng), fy(ng);
    for (size_t i = 0; i < ng; ++i) {
        fx[i] = m[i] * gx[i];
        fy[i] = m[i] * gy[i];
    }
    CartesianField out{ScalarField(mu.basis), ScalarField(mu.basis)};
    b.scalar_from_grid(fx.data(), out[0].coeff.data());
    b.scalar_from_grid(fy.data(), out[1].coeff.data());
    return out;
}

}  // namespace

CartesianField momentum_residual(const System& sys, const FieldState& prev,
                                 const FieldState& next, const std::vector<double>& g1_coeff,
                                 double dt, Scheme scheme) {
    if (prev.u.basis.get() != next.u.basis.get() || prev.u.basis.get() != sys.basis.get())
        throw std::invalid_argument("momentum_residual: mismatched states");
    if (g1_coeff.size() != prev.u.coeff.size())
        throw std::invalid_argument("momentum_residual: increment size mismatch");
    const auto& basis = *sys.basis;
    const auto& beta = basis.stokes_eigenvalues();

    // time-difference and viscous parts stay solenoidal; express them per mode
    VectorField core(sys.basis);
    const VectorField& uvisc = (scheme == Scheme::semi_implicit_em) ? next.u : prev.u;
    for (size_t k = 0; k < core.coeff.size(); ++k) {
        core.coeff[k] = (next.u.coeff[k] - prev.u.coeff[k] - g1_coeff[k]) / dt +
                        beta[k] * uvisc.coeff[k];
    }

    CartesianField conv = convection_full(prev.u);
    CartesianField kort = korteweg_full(prev.mu, prev.phi);
    CartesianField h{vector_component(core, 0), vector_component(core, 1)};
    for (int d = 0; d < 2; ++d)
        for (size_t i = 0; i < h[d].coeff.size(); ++i)
            h[d].coeff[i] += conv[d].coeff[i] - kort[d].coeff[i];
    return h;
}

ScalarField recover_pressure(const CartesianField& h) {
    const BasisPtr& basis = h[0].basis;
    if (basis.get() != h[1].basis.get())
        throw std::invalid_argument("recover_pressure: mismatched components");
    if (basis->boundary() != BoundaryMode::periodic)
        throw std::logic_error("pressure recovery requires the periodic basis");

    ScalarField pi(basis);
    const auto& modes = basis->scalar_modes();
    const double kap0 = 2.0 * M_PI / basis->length();
    // pairs (cos, sin) start after the constant mode; pi_hat = -i (k . h_hat)/|k|^2
    for (size_t i = 1; i + 1 < pi.coeff.size(); i += 2) {
        double kx = kap0 * modes[i].k1;
        double ky = kap0 * modes[i].k2;
        double k2 = kx * kx + ky * ky;
        // complex coefficients c = bc - i bs for each component
        double hx_re = h[0].coeff[i], hx_im = -h[0].coeff[i + 1];
        double hy_re = h[1].coeff[i], hy_im = -h[1].coeff[i + 1];
        double dot_re = kx * hx_re + ky * hy_re;
        double dot_im = kx * hx_im + ky * hy_im;
        // pi_c = -i dot / k2
        double pi_re = dot_im / k2;
        double pi_im = -dot_re / k2;
        pi.coeff[i] = pi_re;
        pi.coeff[i + 1] = -pi_im;
    }
    pi.coeff[0] = 0.0;  // zero mean
    return pi;
}

PressureSeries build_pressure_series(const System& sys, const std::vector<FieldState>& states,
                                     const std::vector<std::vector<double>>& g1_increments,
                                     double dt, Scheme scheme) {
    if (states.size() < 2) throw std::invalid_argument("pressure series needs >= 2 states");
    if (g1_increments.size() + 1 != states.size())
        throw std::invalid_argument("pressure series: increment count mismatch");

    PressureSeries series;
    series.time_primitive = ScalarField(sys.basis);
    for (size_t m = 0; m + 1 < states.size(); ++m) {
        CartesianField h =
            momentum_residual(sys, states[m], states[m + 1], g1_increments[m], dt, scheme);
        ScalarField pi = recover_pressure(h);
        CartesianField grad_pi = scalar_gradient_fields(pi);

        PressureStepRecord rec;
        rec.t = states[m + 1].t;
        rec.pi_mean = pi.coeff[0] * sys.basis->length();  // integral of pi over O
        double res = 0.0, hn = 0.0;
        for (int d = 0; d < 2; ++d) {
            for (size_t i = 0; i < pi.coeff.size(); ++i) {
                double r = h[d].coeff[i] - grad_pi[d].coeff[i];
                res += r * r;
                hn += h[d].coeff[i] * h[d].coeff[i];
            }
        }
        rec.closure_residual = std::sqrt(res);
        rec.h_norm = std::sqrt(hn);
        rec.pi_h_norm = scalar_norm(pi, NormKind::H);

        for (size_t i = 0; i < pi.coeff.size(); ++i)
            series.time_primitive.coeff[i] += dt * pi.coeff[i];
        series.primitive_norm_max =
            std::max(series.primitive_norm_max,
                     scalar_norm(series.time_primitive, NormKind::H));
        series.steps.push_back(rec);
        series.pi.push_back(std::move(pi));
    }
    return series;
}

PressureNormReport pressure_norm_report(const System& sys, const PressureSeries& series,
                                        const std::vector<FieldState>& states, double dt) {
    PressureNormReport rep;
    rep.lhs_proxy = series.primitive_norm_max;
    double int_uv = 0.0, int_phiv2 = 0.0, int_fp = 0.0;
    for (const auto& st : states) {
        rep.u_linf_h = std::max(rep.u_linf_h, std::sqrt(inner_hsigma(st.u, st.u)));
        double uv = velocity_norm(st.u, NormKind::Vsigma);
        double pv = scalar_norm(st.phi, NormKind::V2);
        int_uv += dt * uv * uv;
        int_phiv2 += dt * pv * pv;
        double fp = integrate_pointwise(st.phi, [&](double x) {
            double v = sys.potential->fprime(x);
            return v * v;
        });
        int_fp += dt * fp;
    }
    rep.u_l2_vsig = std::sqrt(int_uv);
    rep.u_l2_vsig_sq = int_uv;
    rep.phi_l2_v2_sq = int_phiv2;
    rep.fprime_l2_sq = int_fp;
    rep.rhs_factors = 1.0 + rep.u_linf_h + rep.u_l2_vsig + rep.u_l2_vsig_sq +
                      rep.phi_l2_v2_sq + rep.fprime_l2_sq;
    rep.ratio = rep.lhs_proxy / rep.rhs_factors;
    return rep;
}

}  // namespace acns
