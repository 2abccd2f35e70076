#pragma once

#include <cstdint>
#include <vector>

#include "acns/potential.hpp"
#include "acns/spectral.hpp"

namespace acns {

enum class G1Kind { additive, diagonal_multiplicative };

struct WienerIncrement {
    std::vector<double> dw1;
    std::vector<double> dw2;
    double dt = 0.0;
};

// Truncated noise: K1 modes drive the leading solenoidal basis directions with
// amplitudes sigma1_k; K2 modes act on the phase through g_k(x) = sigma2_k (1 - x^2),
// which vanishes at the pure phases. Amplitudes decay like (k+1)^{-r}.
struct NoiseModel {
    int k1 = 0;
    int k2 = 0;
    std::vector<double> sigma1;
    std::vector<double> sigma2;
    G1Kind g1_kind = G1Kind::additive;
    double kappa = 0.0;  // diagonal multiplicative gain
    uint64_t seed = 0;

    static NoiseModel make(int k1, int k2, double amp1, double amp2, double decay_r,
                           G1Kind kind, double kappa, uint64_t seed);

    double sum_sigma1_sq() const;
    double sum_sigma2_sq() const;
    double max_sigma1() const;

    // sharp constant of the linear bound |G1(v)| <= c_g1 (1 + |v|)
    double c_g1() const;
    // Lipschitz constant of G1 (zero for the additive kind)
    double lip_g1() const;
    // summability proxy: sum_k (|g_k|_{W^{1,inf}}^2 + |F'' g_k^2|_inf); the second
    // factor is the potential's compensation supremum for ghat = 1 - x^2
    double l2_sq(double compensation_sup) const;
};

// Deterministic counter-based sampling: each entry is a pure function of
// (seed, family, step_index, mode); identical seeds give bitwise-identical
// sequences regardless of threading.
WienerIncrement sample_increment(const NoiseModel& model, double dt, int64_t step_index);

// Stateless N(0,1) draw keyed on (seed, a, b, c); exposed for tests.
double stateless_normal(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

// G1(u) dW1 in solenoidal coefficients.
VectorField apply_G1(const NoiseModel& model, const VectorField& u,
                     const std::vector<double>& dw1);

// Projection of sum_k g_k(J_lambda(phi(.))) dW2_k; pointwise on the grid,
// dealiased on transform-back.
ScalarField apply_G2_lambda(const NoiseModel& model, const RegularizedPotential& pot,
                            const ScalarField& phi, const std::vector<double>& dw2);

struct HsRecord {
    double g1_hs_sq = 0.0;       // |G1(u)|^2_HS
    double g1_bound = 0.0;       // 2 c_g1^2 (1 + |u|^2)
    double g2_grad_hs_sq = 0.0;  // |grad G2_lambda(phi)|^2_HS (projected)
    double g2_grad_bound = 0.0;  // L2^2 |grad phi|^2
    double comp_signed = 0.0;    // sum_k int F''_lambda(phi) g_k(J phi)^2
    double comp_abs = 0.0;       // same with |F''_lambda|
    double comp_bound = 0.0;     // |O| L2^2 (1 + 2 c_f)
};

HsRecord hs_norms(const NoiseModel& model, const RegularizedPotential& pot,
                  const ScalarField& phi, const VectorField& u);

}  // namespace acns
