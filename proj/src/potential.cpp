#include "acns/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acns {

namespace {

double f_raw(double theta, double theta0, double x) {
    // continuous extension: (1 -/+ x) log(1 -/+ x) -> 0 at x = +/-1
    double entropy = 0.0;
    if (x > -1.0) entropy += (1.0 + x) * std::log1p(x);
    if (x < 1.0) entropy += (1.0 - x) * std::log1p(-x);
    return 0.5 * theta * entropy - 0.5 * theta0 * x * x;
}

double fprime_raw(double theta, double theta0, double x) {
    return theta * std::atanh(x) - theta0 * x;
}

// Positive root of F'(x) = 0; the minimizer of F_raw on (0,1). Unique since
// artanh(x)/x increases from 1 to infinity and theta0/theta > 1.
double demix_root(double theta, double theta0) {
    double lo = 1e-12;
    double hi = 1.0 - 1e-16;
    if (fprime_raw(theta, theta0, lo) >= 0.0) return 0.0;  // not reachable for theta < theta0
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (fprime_raw(theta, theta0, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16) break;
    }
    return 0.5 * (lo + hi);
}

// log(cosh s), stable for large |s|
double log_cosh(double s) {
    double a = std::fabs(s);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

constexpr double kMaxInterior = 1.0 - 1e-16;  // largest |J| we ever report

// 8-point Gauss-Legendre nodes/weights on [-1,1]
constexpr double kGlNode[8] = {
    -0.9602898564975362, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975362};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

PotentialSpec PotentialSpec::make(double theta, double theta0) {
    if (!(theta > 0.0) || !(theta < theta0))
        throw std::invalid_argument("potential requires 0 < theta < theta0");
    PotentialSpec s;
    s.theta = theta;
    s.theta0 = theta0;
    s.c_f = theta0 - theta;
    double xstar = demix_root(theta, theta0);
    s.shift = -f_raw(theta, theta0, xstar);
    return s;
}

double eval_F(const PotentialSpec& spec, double x) {
    if (std::fabs(x) > 1.0) throw std::domain_error("eval_F: |x| > 1");
    return f_raw(spec.theta, spec.theta0, x) + spec.shift;
}

double eval_Fprime(const PotentialSpec& spec, double x) {
    if (!(std::fabs(x) < 1.0)) throw std::domain_error("eval_Fprime: |x| >= 1");
    return fprime_raw(spec.theta, spec.theta0, x);
}

double eval_Fsecond(const PotentialSpec& spec, double x) {
    if (!(std::fabs(x) < 1.0)) throw std::domain_error("eval_Fsecond: |x| >= 1");
    return spec.theta / ((1.0 - x) * (1.0 + x)) - spec.theta0;
}

double gamma(const PotentialSpec& spec, double x) {
    if (!(std::fabs(x) < 1.0)) throw std::domain_error("gamma: |x| >= 1");
    return spec.theta * (std::atanh(x) - x);
}

double resolvent_s(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    const double lt = layer.lambda * spec.theta;
    if (x == 0.0) return 0.0;
    // g(s) = (1-lt) tanh(s) + lt s, strictly increasing, g(0) = 0.
    auto g = [&](double s) { return (1.0 - lt) * std::tanh(s) + lt * s; };
    auto gp = [&](double s) {
        double t = std::tanh(s);
        return (1.0 - lt) * (1.0 - t * t) + lt;
    };
    // bracket the root
    double lo, hi;
    if (x > 0.0) {
        lo = 0.0;
        hi = std::max(2.0, (x + 1.0) / lt);
        while (g(hi) < x) hi *= 2.0;
    } else {
        hi = 0.0;
        lo = std::min(-2.0, (x - 1.0) / lt);
        while (g(lo) > x) lo *= 2.0;
    }
    // gamma_lambda divides the x-residual by lambda, so polish well past
    // root_tolerance: stop only once the Newton step stalls at round-off
    const double tol = std::min(layer.root_tolerance, 1e-12) * layer.lambda;
    double s = std::clamp(std::atanh(std::clamp(x, -0.999, 0.999)), lo, hi);
    for (int it = 0; it < 200; ++it) {
        double r = g(s) - x;
        if (std::fabs(r) <= tol * (1.0 + std::fabs(x))) return s;
        if (r > 0.0)
            hi = s;
        else
            lo = s;
        double step = r / gp(s);
        double snext = s - step;
        if (!(snext > lo) || !(snext < hi)) snext = 0.5 * (lo + hi);  // bisection fallback
        if (snext == s) break;
        s = snext;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           (1.0 + std::min(std::fabs(lo), std::fabs(hi))))
            break;
    }
    return s;
}

double resolvent_J(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    double j = std::tanh(resolvent_s(layer, spec, x));
    return std::clamp(j, -kMaxInterior, kMaxInterior);
}

double yosida_gamma(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    double s = resolvent_s(layer, spec, x);
    // (x - J)/lambda evaluated without cancellation: x - tanh(s) = lambda theta (s - tanh s)
    return spec.theta * (s - std::tanh(s));
}

double eval_F_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    const int panels = std::max(1, layer.quadrature_order);
    double integral = 0.0;
    const double h = x / panels;
    for (int p = 0; p < panels; ++p) {
        double a = p * h;
        for (int q = 0; q < 8; ++q) {
            double t = a + 0.5 * h * (kGlNode[q] + 1.0);
            integral += 0.5 * h * kGlWeight[q] * yosida_gamma(layer, spec, t);
        }
    }
    return spec.shift + integral - 0.5 * spec.c_f * x * x;
}

double eval_F_lambda_closed(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    const double lt = layer.lambda * spec.theta;
    const double s = resolvent_s(layer, spec, x);
    const double th = std::tanh(s);
    const double lc = log_cosh(s);
    // int_0^x gamma_lambda, substituting t = g(sigma)
    double integral = spec.theta * (1.0 - lt) * (s * th - lc - 0.5 * th * th)
                    + spec.theta * lt * (0.5 * s * s - lc);
    return spec.shift + integral - 0.5 * spec.c_f * x * x;
}

double eval_Fprime_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    return yosida_gamma(layer, spec, x) - spec.c_f * x;
}

double eval_Fsecond_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x) {
    double s = resolvent_s(layer, spec, x);
    double sh = std::sinh(s);
    double gp = spec.theta * sh * sh;  // gamma'(J) in the transformed variable
    if (!std::isfinite(gp)) return 1.0 / layer.lambda - spec.c_f;
    return gp / (1.0 + layer.lambda * gp) - spec.c_f;
}

}  // namespace acns
