#include "acns/pressure.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace acns;

namespace {

BasisPtr basis32() {
    BasisConfig cfg;
    cfg.grid_n = 32;
    cfg.length = 2.0 * M_PI;
    return build_basis(cfg);
}

const PotentialSpec kSpec = PotentialSpec::make(1.0, 2.0);

FloryHugginsYosida fh_model(double lambda) {
    YosidaLayer layer;
    layer.lambda = lambda;
    return FloryHugginsYosida(kSpec, layer);
}

ScalarField band_phi(const BasisPtr& b, oracle::Rng& rng, double amp) {
    ScalarField phi(b);
    const auto& modes = b->scalar_modes();
    for (size_t i = 0; i < modes.size(); ++i) {
        long k2 = static_cast<long>(modes[i].k1) * modes[i].k1 +
                  static_cast<long>(modes[i].k2) * modes[i].k2;
        if (k2 > 16) continue;
        phi.coeff[i] = rng.normal();
    }
    GridStats gs = scalar_grid_stats(phi);
    if (gs.max_abs > 0)
        for (double& c : phi.coeff) c *= amp / gs.max_abs;
    return phi;
}

VectorField band_u(const BasisPtr& b, oracle::Rng& rng, double amp) {
    VectorField u(b);
    const auto& modes = b->vector_modes();
    for (size_t k = 0; k < modes.size(); ++k) {
        long k2 = static_cast<long>(modes[k].k1) * modes[k].k1 +
                  static_cast<long>(modes[k].k2) * modes[k].k2;
        if (k2 > 16) continue;
        u.coeff[k] = amp * rng.normal();
    }
    return u;
}

struct ShortRun {
    std::vector<FieldState> states;
    std::vector<std::vector<double>> g1;
};

ShortRun run_and_record(const System& sys, const NoiseModel& noise, const VectorField& u0,
                        const ScalarField& phi0, double T, double dt) {
    ShortRun out;
    FieldState st = make_state(sys, u0, phi0);
    out.states.push_back(st);
    StepperConfig cfg;
    cfg.dt = dt;
    RngIncrementSource src(noise, dt);
    SimulateOptions opts;
    opts.on_step = [&](const FieldState&, const FieldState& next, const StepData& data, int) {
        out.states.push_back(next);
        out.g1.push_back(data.g1_coeff);
    };
    simulate(sys, std::move(st), T, cfg, src, opts);
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("pressure");

TEST_CASE("momentum residual: orthogonal to solenoidal fields, zero on rest") {
    BasisPtr b = basis32();
    FloryHugginsYosida pot = fh_model(1e-2);
    NoiseModel noise = NoiseModel::make(4, 4, 0.2, 0.2, 2.0, G1Kind::additive, 0.0, 31);
    System sys{b, &pot, &noise};
    oracle::Rng rng(3);

    ShortRun run = run_and_record(sys, noise, band_u(b, rng, 0.3), band_phi(b, rng, 0.5),
                                  5e-3, 1e-3);
    for (size_t m = 0; m + 1 < run.states.size(); ++m) {
        CartesianField h =
            momentum_residual(sys, run.states[m], run.states[m + 1], run.g1[m], 1e-3);
        // <h, w> = 0 for 50 random solenoidal fields
        for (int trial = 0; trial < 50; ++trial) {
            VectorField w = band_u(b, rng, 1.0);
            double norm_w = std::sqrt(inner_hsigma(w, w));
            ScalarField wx = vector_component(w, 0);
            ScalarField wy = vector_component(w, 1);
            double dot = inner_h(h[0], wx) + inner_h(h[1], wy);
            double scale = std::sqrt(inner_h(h[0], h[0]) + inner_h(h[1], h[1]));
            CHECK(std::fabs(dot) <= 1e-9 * (1.0 + scale * norm_w));
        }
    }

    // zero dynamics: u = 0, phi = 0, noise off -> h = 0
    NoiseModel quiet = NoiseModel::make(0, 0, 0.0, 0.0, 2.0, G1Kind::additive, 0.0, 1);
    System qsys{b, &pot, &quiet};
    ShortRun zero = run_and_record(qsys, quiet, VectorField(b), ScalarField(b), 2e-3, 1e-3);
    CartesianField h0 = momentum_residual(qsys, zero.states[0], zero.states[1],
                                          std::vector<double>(b->n_vector(), 0.0), 1e-3);
    for (int d = 0; d < 2; ++d)
        for (double c : h0[d].coeff) CHECK(std::fabs(c) < 1e-14);
}

TEST_CASE("recover_pressure: exact inversion of manufactured gradients") {
    BasisPtr b = basis32();
    oracle::Rng rng(7);

    // h = grad psi recovers psi (zero mean) and leaves no remainder
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField psi = band_phi(b, rng, 1.0);
        psi.coeff[0] = 3.7;  // mean offset must drop out
        CartesianField g = scalar_gradient_fields(psi);
        ScalarField pi = recover_pressure(g);
        CHECK(pi.coeff[0] == 0.0);
        for (size_t i = 1; i < pi.coeff.size(); ++i)
            CHECK(pi.coeff[i] == doctest::Approx(psi.coeff[i]).epsilon(1e-10));
    }

    // h solenoidal -> pi = 0
    VectorField u = band_u(b, rng, 1.0);
    CartesianField h{vector_component(u, 0), vector_component(u, 1)};
    ScalarField pi = recover_pressure(h);
    for (double c : pi.coeff) CHECK(std::fabs(c) < 1e-12);

    // random h: remainder orthogonal to all gradients
    for (int trial = 0; trial < 20; ++trial) {
        CartesianField hr{band_phi(b, rng, 1.0), band_phi(b, rng, 1.0)};
        ScalarField pr = recover_pressure(hr);
        CartesianField gp = scalar_gradient_fields(pr);
        ScalarField chi = band_phi(b, rng, 1.0);
        CartesianField gchi = scalar_gradient_fields(chi);
        double dot = 0.0;
        for (int d = 0; d < 2; ++d)
            for (size_t i = 0; i < hr[d].coeff.size(); ++i)
                dot += (hr[d].coeff[i] - gp[d].coeff[i]) * gchi[d].coeff[i];
        CHECK(std::fabs(dot) < 1e-9);
    }

    // uniqueness up to a constant: shifting h by grad(const) = 0 changes nothing
    CartesianField hc{band_phi(b, rng, 1.0), band_phi(b, rng, 1.0)};
    ScalarField p1 = recover_pressure(hc);
    CartesianField hc2 = hc;
    ScalarField p2 = recover_pressure(hc2);
    for (size_t i = 0; i < p1.coeff.size(); ++i) CHECK(p1.coeff[i] == p2.coeff[i]);
}

TEST_CASE("pressure series: per-step closure, zero mean, norm report") {
    BasisPtr b = basis32();
    FloryHugginsYosida pot = fh_model(1e-2);
    NoiseModel noise = NoiseModel::make(4, 4, 0.2, 0.2, 2.0, G1Kind::additive, 0.0, 41);
    System sys{b, &pot, &noise};
    oracle::Rng rng(11);

    const double dt = 1e-3;
    ShortRun run =
        run_and_record(sys, noise, band_u(b, rng, 0.3), band_phi(b, rng, 0.5), 0.02, dt);
    PressureSeries series = build_pressure_series(sys, run.states, run.g1, dt);
    CHECK(series.steps.size() == run.g1.size());
    for (const auto& rec : series.steps) {
        CHECK(std::fabs(rec.pi_mean) < 1e-12);
        CHECK(rec.closure_residual <= 1e-9 * (1.0 + rec.h_norm));
    }
    CHECK(series.primitive_norm_max > 0.0);

    PressureNormReport rep = pressure_norm_report(sys, series, run.states, dt);
    CHECK(rep.lhs_proxy == doctest::Approx(series.primitive_norm_max).epsilon(1e-15));
    CHECK(rep.rhs_factors >= 1.0);
    CHECK(rep.ratio >= 0.0);

    // zero trajectory: zero pressure, zero ratio
    NoiseModel quiet = NoiseModel::make(0, 0, 0.0, 0.0, 2.0, G1Kind::additive, 0.0, 1);
    System qsys{b, &pot, &quiet};
    ShortRun zero = run_and_record(qsys, quiet, VectorField(b), ScalarField(b), 5e-3, dt);
    PressureSeries zseries = build_pressure_series(qsys, zero.states, zero.g1, dt);
    PressureNormReport zrep = pressure_norm_report(qsys, zseries, zero.states, dt);
    CHECK(zrep.lhs_proxy < 1e-14);
    CHECK(zrep.ratio < 1e-14);
}

TEST_CASE("pressure norm proxy is stable under dt halving on a fixed path") {
    BasisPtr b = basis32();
    FloryHugginsYosida pot = fh_model(1e-2);
    NoiseModel noise = NoiseModel::make(4, 4, 0.2, 0.2, 2.0, G1Kind::additive, 0.0, 51);
    System sys{b, &pot, &noise};
    oracle::Rng rng(13);
    VectorField u0 = band_u(b, rng, 0.3);
    ScalarField phi0 = band_phi(b, rng, 0.5);

    const double T = 0.02, dt0 = 1e-3;
    double ratios[2];
    for (int half = 0; half < 2; ++half) {
        double dt = dt0 / (half ? 2.0 : 1.0);
        ShortRun run;
        FieldState st = make_state(sys, u0, phi0);
        run.states.push_back(st);
        StepperConfig cfg;
        cfg.dt = dt;
        AggregatedIncrementSource src(noise, dt0 / 2.0, half ? 1 : 2);
        SimulateOptions opts;
        opts.on_step = [&](const FieldState&, const FieldState& next, const StepData& data,
                           int) {
            run.states.push_back(next);
            run.g1.push_back(data.g1_coeff);
        };
        simulate(sys, std::move(st), T, cfg, src, opts);
        PressureSeries series = build_pressure_series(sys, run.states, run.g1, dt);
        PressureNormReport rep = pressure_norm_report(sys, series, run.states, dt);
        ratios[half] = rep.ratio;
    }
    CHECK(ratios[1] <= 4.0 * ratios[0]);
    CHECK(ratios[0] <= 4.0 * ratios[1]);
}

TEST_SUITE_END();
