#pragma once

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace acns {

enum class BoundaryMode { periodic, neumann_cosine };

// H / V1 / V2 are scalar norms, the sigma family applies to solenoidal fields.
// V1^2 = H^2 + |grad .|^2, V2^2 = |(I + A).|^2, Vsigma = |grad .|,
// VsigmaStar = |grad A^{-1}.|.
enum class NormKind { H, V1, V2, Hsigma, Vsigma, VsigmaStar };

struct BasisConfig {
    int grid_n = 64;
    double length = 6.283185307179586;
    BoundaryMode boundary = BoundaryMode::periodic;
    double dealias_fraction = 2.0 / 3.0;
};

struct ScalarModeInfo {
    int k1 = 0, k2 = 0;  // periodic: integer wave-vector; neumann: cosine indices
    int part = 0;        // periodic only: 0 = cos, 1 = sin
    double alpha = 0.0;  // Laplacian eigenvalue
};

struct VectorModeInfo {
    int k1 = 0, k2 = 0;
    int part = 0;
    double beta = 0.0;      // Stokes eigenvalue
    double px = 0.0, py = 0.0;  // polarization k_perp / |k|
};

class SpectralBasis;
using BasisPtr = std::shared_ptr<const SpectralBasis>;

BasisPtr build_basis(const BasisConfig& config);

struct ScalarField {
    BasisPtr basis;
    std::vector<double> coeff;

    ScalarField() = default;
    explicit ScalarField(BasisPtr b);
};

// Solenoidal field: coefficients over the divergence-free modes only.
struct VectorField {
    BasisPtr basis;
    std::vector<double> coeff;

    VectorField() = default;
    explicit VectorField(BasisPtr b);
};

// General (not necessarily solenoidal) vector field, one scalar field per component.
using CartesianField = std::array<ScalarField, 2>;

class SpectralBasis {
public:
    explicit SpectralBasis(const BasisConfig& config);
    ~SpectralBasis();
    SpectralBasis(const SpectralBasis&) = delete;
    SpectralBasis& operator=(const SpectralBasis&) = delete;

    BoundaryMode boundary() const { return boundary_; }
    int grid_n() const { return n_; }
    double length() const { return length_; }
    double measure() const { return length_ * length_; }  // |O|
    double cell_area() const { return cell_area_; }
    int grid_points() const { return n_ * n_; }
    int kmax() const { return kmax_; }
    double dealias_fraction() const { return dealias_fraction_; }

    size_t n_scalar() const { return scalar_modes_.size(); }
    size_t n_vector() const { return vector_modes_.size(); }
    const std::vector<ScalarModeInfo>& scalar_modes() const { return scalar_modes_; }
    const std::vector<VectorModeInfo>& vector_modes() const { return vector_modes_; }
    const std::vector<double>& scalar_eigenvalues() const { return scalar_alpha_; }
    const std::vector<double>& stokes_eigenvalues() const { return vector_beta_; }

    // transforms between coefficients and the N x N physical grid (row-major, x-major)
    void scalar_to_grid(const double* coeff, double* grid) const;
    void scalar_from_grid(const double* grid, double* coeff) const;
    void scalar_gradient_grid(const double* coeff, double* gx, double* gy) const;
    void vector_to_grid(const double* coeff, double* ux, double* uy) const;
    // orthogonal projection onto the retained divergence-free modes
    void vector_from_grid(const double* gx, const double* gy, double* coeff) const;
    void vector_gradient_grid(const double* coeff, double* dxux, double* dyux, double* dxuy,
                              double* dyuy) const;

private:
    void build_periodic();
    void build_neumann();

    BoundaryMode boundary_;
    int n_;
    double length_;
    double dealias_fraction_;
    double cell_area_;
    int kmax_ = 0;

    std::vector<ScalarModeInfo> scalar_modes_;
    std::vector<VectorModeInfo> vector_modes_;
    std::vector<double> scalar_alpha_;
    std::vector<double> vector_beta_;

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// --- field algebra -----------------------------------------------------------

ScalarField constant_field(BasisPtr basis, double value);
ScalarField vector_component(const VectorField& u, int dim);
CartesianField scalar_gradient_fields(const ScalarField& f);  // periodic only

VectorField leray_project(const ScalarField& fx, const ScalarField& fy);
double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w);
VectorField nonlinear_B(const VectorField& u);
ScalarField convect(const VectorField& u, const ScalarField& phi);
VectorField korteweg(const ScalarField& mu, const ScalarField& phi);
VectorField korteweg_tensor(const ScalarField& phi);  // P(-div(grad phi (x) grad phi))
VectorField inverse_stokes(const VectorField& u);
VectorField apply_stokes(const VectorField& u);

double scalar_norm(const ScalarField& f, NormKind kind);
double velocity_norm(const VectorField& u, NormKind kind);
// same quantities evaluated by physical-space quadrature (Parseval counterpart)
double scalar_norm_grid(const ScalarField& f, NormKind kind);
double velocity_norm_grid(const VectorField& u, NormKind kind);

double inner_h(const ScalarField& a, const ScalarField& b);
double inner_hsigma(const VectorField& a, const VectorField& b);

// pointwise lifts through the physical grid (dealiased on transform-back)
ScalarField lift_pointwise(const ScalarField& phi, const std::function<double(double)>& fn);
double integrate_pointwise(const ScalarField& phi, const std::function<double(double)>& fn);

struct GridStats {
    double min = 0.0, max = 0.0, max_abs = 0.0;
    double exceed_frac = 0.0;  // fraction of grid points with |phi| > 1
};
GridStats scalar_grid_stats(const ScalarField& phi);

}  // namespace acns
