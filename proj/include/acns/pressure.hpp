#pragma once

#include <string>
#include <vector>

#include "acns/galerkin.hpp"

namespace acns {

// Unprojected residual of the discrete momentum equation,
//   h = (u^{m+1} - u^m - G1(u^m) dW1) / dt - Lap u^{impl} + (u^m . grad) u^m
//       - mu^m grad phi^m,
// assembled component-wise without the Leray projection; u^{impl} matches the
// stepper's implicit viscous level so the solenoidal part vanishes identically.
CartesianField momentum_residual(const System& sys, const FieldState& prev,
                                 const FieldState& next, const std::vector<double>& g1_coeff,
                                 double dt, Scheme scheme = Scheme::semi_implicit_em);

// De Rham inversion on the torus: pi_hat(k) = -i k . h_hat(k) / |k|^2, zero mean.
ScalarField recover_pressure(const CartesianField& h);

struct PressureStepRecord {
    double t = 0.0;
    double pi_mean = 0.0;           // integral of pi over the domain
    double closure_residual = 0.0;  // |h - grad pi| over both components
    double h_norm = 0.0;
    double pi_h_norm = 0.0;
};

struct PressureSeries {
    std::vector<PressureStepRecord> steps;
    std::vector<ScalarField> pi;      // per-step pressure
    ScalarField time_primitive;       // Pi^m = sum pi dt
    double primitive_norm_max = 0.0;  // max_m |Pi^m|_H: the W^{-1,inf}(0,T;H) proxy
};

// Post-processes a stored trajectory (states at every step plus the applied
// G1 increments) into the per-step pressure and the norm proxy.
PressureSeries build_pressure_series(const System& sys, const std::vector<FieldState>& states,
                                     const std::vector<std::vector<double>>& g1_increments,
                                     double dt, Scheme scheme = Scheme::semi_implicit_em);

struct PressureNormReport {
    double lhs_proxy = 0.0;     // max_m |Pi^m|_H
    double u_linf_h = 0.0;      // sup_m |u|_Hsigma
    double u_l2_vsig = 0.0;     // (int |u|^2_Vsigma)^(1/2)
    double u_l2_vsig_sq = 0.0;
    double phi_l2_v2_sq = 0.0;
    double fprime_l2_sq = 0.0;  // int |F'_lambda(phi)|^2_H dt
    double rhs_factors = 0.0;   // 1 + sum of the factors above
    double ratio = 0.0;         // lhs_proxy / rhs_factors
};

PressureNormReport pressure_norm_report(const System& sys, const PressureSeries& series,
                                        const std::vector<FieldState>& states, double dt);

}  // namespace acns
