#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace acns {

/// Logarithmic double-well free-energy density
///   F(x) = (theta/2)[(1+x)log(1+x) + (1-x)log(1-x)] - (theta0/2) x^2 + shift
/// on [-1,1], with 0 < theta < theta0. The shift makes min F = 0.
struct PotentialSpec {
    double theta  = 1.0;
    double theta0 = 2.0;
    double shift  = 0.0;  // additive constant so that F >= 0 on [-1,1]
    double c_f    = 1.0;  // lower convexity bound: F'' >= -c_f, c_f = theta0 - theta

    // Builds a spec with shift = -min F_raw (root of F' located by bisection)
    // and c_f = theta0 - theta. Throws std::invalid_argument unless 0 < theta < theta0.
    static PotentialSpec make(double theta, double theta0);
};

/// Parameters of the Yosida regularization layer.
struct YosidaLayer {
    double lambda         = 1e-2;   // in (0,1)
    double root_tolerance = 1e-12;  // residual tolerance of the resolvent solve
    int quadrature_order  = 32;     // Gauss-Legendre panels for the F_lambda integral
};

double eval_F(const PotentialSpec& spec, double x);        // |x| <= 1, endpoint by continuity
double eval_Fprime(const PotentialSpec& spec, double x);   // |x| < 1 strictly
double eval_Fsecond(const PotentialSpec& spec, double x);  // |x| < 1 strictly

/// Monotone part of F': gamma(x) = F'(x) + c_f x = theta (artanh x - x).
double gamma(const PotentialSpec& spec, double x);

/// Resolvent J_lambda(x) = (I + lambda gamma)^{-1}(x), defined for every real x,
/// with values in (-1,1). Solved as a bracketed monotone root find (bisection with
/// Newton polishing) in the variable s = artanh(y), where the equation becomes
/// smooth on the whole line: (1 - lambda theta) tanh s + lambda theta s = x.
double resolvent_J(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// Root of the transformed resolvent equation; tanh of it is J_lambda(x).
double resolvent_s(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// Yosida approximation gamma_lambda(x) = (x - J_lambda(x)) / lambda.
double yosida_gamma(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// F_lambda(x) = F(0) + int_0^x gamma_lambda - (c_f/2) x^2, by composite
/// Gauss-Legendre quadrature with layer.quadrature_order panels.
double eval_F_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// Same quantity through the closed-form antiderivative of gamma_lambda in the
/// transformed variable; used by grid-sized loops where quadrature would dominate.
double eval_F_lambda_closed(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// F'_lambda(x) = gamma_lambda(x) - c_f x; globally Lipschitz (1/lambda + c_f).
double eval_Fprime_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// F''_lambda(x) = gamma_lambda'(x) - c_f >= -c_f.
double eval_Fsecond_lambda(const YosidaLayer& layer, const PotentialSpec& spec, double x);

/// Pointwise interface the simulator uses on the physical grid. Implementations
/// must be safe for any real argument.
class RegularizedPotential {
public:
    virtual ~RegularizedPotential() = default;
    virtual double f(double x) const = 0;          // F_lambda
    virtual double fprime(double x) const = 0;     // F'_lambda
    virtual double fsecond(double x) const = 0;    // F''_lambda
    virtual double resolvent(double x) const = 0;  // J_lambda
    virtual double lambda() const = 0;
    virtual double convexity_bound() const = 0;    // c_f
    virtual double f_unregularized(double x) const = 0;  // F itself where defined
    // sup over (-1,1) of |F''(x) (1 - x^2)^2|, the compensation constant for the
    // degenerate noise family ghat = 1 - x^2
    virtual double compensation_sup() const = 0;
};

/// Production model: Flory-Huggins potential with Yosida regularization.
class FloryHugginsYosida final : public RegularizedPotential {
public:
    FloryHugginsYosida(PotentialSpec spec, YosidaLayer layer)
        : spec_(spec), layer_(layer) {}

    double f(double x) const override { return eval_F_lambda_closed(layer_, spec_, x); }
    double fprime(double x) const override { return eval_Fprime_lambda(layer_, spec_, x); }
    double fsecond(double x) const override { return eval_Fsecond_lambda(layer_, spec_, x); }
    double resolvent(double x) const override { return resolvent_J(layer_, spec_, x); }
    double lambda() const override { return layer_.lambda; }
    double convexity_bound() const override { return spec_.c_f; }
    double f_unregularized(double x) const override { return eval_F(spec_, x); }
    double compensation_sup() const override {
        // |theta (1-x^2) - theta0 (1-x^2)^2| maximized over (-1,1)
        return std::max(spec_.theta * spec_.theta / (4.0 * spec_.theta0),
                        spec_.theta0 - spec_.theta);
    }

    const PotentialSpec& spec() const { return spec_; }
    const YosidaLayer& layer() const { return layer_; }

private:
    PotentialSpec spec_;
    YosidaLayer layer_;
};

/// Quadratic test double F = (curvature/2) x^2 with gamma_lin(y) = curvature * y.
/// The resolvent is the exact linear contraction x / (1 + lambda curvature), so
/// band-limited fields stay band-limited under the full pipeline. Used by the
/// exact-representation convergence cases and as the forced analytic resolvent check.
class QuadraticPotential final : public RegularizedPotential {
public:
    QuadraticPotential(double curvature, double lambda)
        : curvature_(curvature), lambda_(lambda) {
        if (curvature <= 0.0) throw std::invalid_argument("curvature must be positive");
        curvature_lam_ = curvature / (1.0 + lambda * curvature);
    }

    double f(double x) const override { return 0.5 * curvature_lam_ * x * x; }
    double fprime(double x) const override { return curvature_lam_ * x; }
    double fsecond(double) const override { return curvature_lam_; }
    double resolvent(double x) const override { return x / (1.0 + lambda_ * curvature_); }
    double lambda() const override { return lambda_; }
    double convexity_bound() const override { return 0.0; }
    double f_unregularized(double x) const override { return 0.5 * curvature_ * x * x; }
    double compensation_sup() const override { return curvature_; }

private:
    double curvature_;
    double lambda_;
    double curvature_lam_;
};

}  // namespace acns
