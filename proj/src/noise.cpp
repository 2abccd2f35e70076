#include "acns/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace acns {

namespace {

inline uint64_t sm64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t mix(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t x = sm64(seed + 0x9E3779B97F4A7C15ull);
    x = sm64(x ^ (a * 0xD6E8FEB86659FD93ull + 0xA24BAED4963EE407ull));
    x = sm64(x ^ (b * 0xCA5A826395121157ull + 0x9E6C63D0876A9F4Bull));
    x = sm64(x ^ (c * 0xE7037ED1A0B428DBull + 0x8EBC6AF09C88C6E3ull));
    return x;
}

}  // namespace

double stateless_normal(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = mix(seed, a, b, c);
    uint64_t h1 = sm64(h ^ 0x2545F4914F6CDD1Dull);
    uint64_t h2 = sm64(h ^ 0x9E3779B97F4A7C15ull);
    double u1 = ((h1 >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = (h2 >> 11) * 0x1.0p-53;        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

NoiseModel NoiseModel::make(int k1, int k2, double amp1, double amp2, double decay_r,
                            G1Kind kind, double kappa, uint64_t seed) {
    if (k1 < 0 || k2 < 0) throw std::invalid_argument("noise mode counts must be >= 0");
    if (decay_r < 0.0) throw std::invalid_argument("noise decay exponent must be >= 0");
    NoiseModel m;
    m.k1 = k1;
    m.k2 = k2;
    m.g1_kind = kind;
    m.kappa = kappa;
    m.seed = seed;
    m.sigma1.resize(k1);
    m.sigma2.resize(k2);
    for (int k = 0; k < k1; ++k) m.sigma1[k] = amp1 * std::pow(k + 1.0, -decay_r);
    for (int k = 0; k < k2; ++k) m.sigma2[k] = amp2 * std::pow(k + 1.0, -decay_r);
    return m;
}

double NoiseModel::sum_sigma1_sq() const {
    double s = 0.0;
    for (double v : sigma1) s += v * v;
    return s;
}

double NoiseModel::sum_sigma2_sq() const {
    double s = 0.0;
    for (double v : sigma2) s += v * v;
    return s;
}

double NoiseModel::max_sigma1() const {
    double s = 0.0;
    for (double v : sigma1) s = std::max(s, std::fabs(v));
    return s;
}

double NoiseModel::c_g1() const {
    double root = std::sqrt(sum_sigma1_sq());
    if (g1_kind == G1Kind::additive) return root;
    return root * std::max(1.0, kappa);
}

double NoiseModel::lip_g1() const {
    if (g1_kind == G1Kind::additive) return 0.0;
    return kappa * max_sigma1();
}

double NoiseModel::l2_sq(double compensation_sup) const {
    // ghat = 1 - x^2 on [-1,1]: |ghat|_inf = 1, |ghat'|_inf = 2
    double w1inf_sq = 4.0;
    return sum_sigma2_sq() * (w1inf_sq + compensation_sup);
}

WienerIncrement sample_increment(const NoiseModel& model, double dt, int64_t step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("increment requires dt > 0");
    WienerIncrement w;
    w.dt = dt;
    w.dw1.resize(model.k1);
    w.dw2.resize(model.k2);
    const double root_dt = std::sqrt(dt);
    const auto step = static_cast<uint64_t>(step_index);
    for (int k = 0; k < model.k1; ++k)
        w.dw1[k] = root_dt * stateless_normal(model.seed, 1, step, static_cast<uint64_t>(k));
    for (int k = 0; k < model.k2; ++k)
        w.dw2[k] = root_dt * stateless_normal(model.seed, 2, step, static_cast<uint64_t>(k));
    return w;
}

VectorField apply_G1(const NoiseModel& model, const VectorField& u,
                     const std::vector<double>& dw1) {
    if (dw1.size() != static_cast<size_t>(model.k1))
        throw std::invalid_argument("apply_G1: increment size does not match the mode count");
    if (static_cast<size_t>(model.k1) > u.coeff.size())
        throw std::invalid_argument("apply_G1: more noise modes than velocity modes");
    VectorField out(u.basis);
    for (int k = 0; k < model.k1; ++k) {
        double gain = model.sigma1[k];
        if (model.g1_kind == G1Kind::diagonal_multiplicative)
            gain *= 1.0 + model.kappa * u.coeff[k];
        out.coeff[k] = gain * dw1[k];
    }
    return out;
}

ScalarField apply_G2_lambda(const NoiseModel& model, const RegularizedPotential& pot,
                            const ScalarField& phi, const std::vector<double>& dw2) {
    if (dw2.size() != static_cast<size_t>(model.k2))
        throw std::invalid_argument("apply_G2_lambda: increment size mismatch");
    double w = 0.0;
    for (int k = 0; k < model.k2; ++k) w += model.sigma2[k] * dw2[k];
    if (model.k2 == 0 || w == 0.0) return ScalarField(phi.basis);
    ScalarField g = lift_pointwise(phi, [&](double x) {
        double j = pot.resolvent(x);
        return 1.0 - j * j;
    });
    for (double& c : g.coeff) c *= w;
    return g;
}

HsRecord hs_norms(const NoiseModel& model, const RegularizedPotential& pot,
                  const ScalarField& phi, const VectorField& u) {
    HsRecord r;
    const double s2 = model.sum_sigma2_sq();
    const double l2sq = model.l2_sq(pot.compensation_sup());
    const double cf = pot.convexity_bound();
    const double measure = phi.basis->measure();

    if (model.g1_kind == G1Kind::additive) {
        r.g1_hs_sq = model.sum_sigma1_sq();
    } else {
        for (int k = 0; k < model.k1; ++k) {
            double gain = model.sigma1[k] * (1.0 + model.kappa * u.coeff[k]);
            r.g1_hs_sq += gain * gain;
        }
    }
    double u_h2 = 0.0;
    for (double c : u.coeff) u_h2 += c * c;
    double cg = model.c_g1();
    r.g1_bound = 2.0 * cg * cg * (1.0 + u_h2);

    double grad_phi = scalar_norm(phi, NormKind::Vsigma);
    r.g2_grad_bound = l2sq * grad_phi * grad_phi;
    r.comp_bound = measure * l2sq * (1.0 + 2.0 * cf);
    if (s2 == 0.0) return r;

    // single grid pass: the shared field ghat(J phi) plus the compensation sums
    const auto& b = *phi.basis;
    std::vector<double> grid(b.grid_points());
    b.scalar_to_grid(phi.coeff.data(), grid.data());
    double signed_acc = 0.0, abs_acc = 0.0;
    for (double& x : grid) {
        double j = pot.resolvent(x);
        double ghat = 1.0 - j * j;
        double fdd = pot.fsecond(x);
        signed_acc += fdd * ghat * ghat;
        abs_acc += std::fabs(fdd) * ghat * ghat;
        x = ghat;
    }
    ScalarField g(phi.basis);
    b.scalar_from_grid(grid.data(), g.coeff.data());
    double grad_g = scalar_norm(g, NormKind::Vsigma);
    r.g2_grad_hs_sq = s2 * grad_g * grad_g;
    r.comp_signed = s2 * signed_acc * b.cell_area();
    r.comp_abs = s2 * abs_acc * b.cell_area();
    return r;
}

}  // namespace acns
