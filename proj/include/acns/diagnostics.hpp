#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acns/galerkin.hpp"

namespace acns {

// One row of the per-trajectory energy bookkeeping. Instantaneous values are
// taken at the recorded state; cum_* are left-endpoint time integrals over all
// steps up to it; mart_* are the running stochastic-integral partial sums.
struct LedgerRecord {
    int step = 0;
    double t = 0.0;
    double u_h2 = 0.0;      // |u|^2_Hsigma
    double gradphi2 = 0.0;  // |grad phi|^2
    double fint = 0.0;      // int F_lambda(phi), grid quadrature
    double visc_rate = 0.0;
    double mu_rate = 0.0;
    double cum_visc = 0.0;
    double cum_mu = 0.0;
    double g1_hs = 0.0;        // integrand values at the step start
    double g2_grad_hs = 0.0;
    double comp_signed = 0.0;
    double comp_abs = 0.0;
    double cum_g1_half = 0.0;
    double cum_g2grad_half = 0.0;
    double cum_comp_half = 0.0;
    double cum_u_h2 = 0.0;
    double cum_gradphi2 = 0.0;
    double mart_u = 0.0;
    double mart_mu = 0.0;
    double phi_max_abs = 0.0;
    double exceed_frac = 0.0;

    double energy() const { return 0.5 * u_h2 + 0.5 * gradphi2 + fint; }
};

class EnergyLedger {
public:
    EnergyLedger(System sys, int cadence = 1);

    void start(const FieldState& initial);
    void on_step(const FieldState& prev, const FieldState& next, const StepData& data,
                 int step);
    // hook with the signature simulate() expects
    std::function<void(const FieldState&, const FieldState&, const StepData&, int)> hook();

    const std::vector<LedgerRecord>& records() const { return records_; }
    const System& system() const { return sys_; }
    int cadence() const { return cadence_; }
    void write_csv(const std::string& path) const;

private:
    LedgerRecord capture(const FieldState& state, int step) const;

    System sys_;
    int cadence_;
    double cum_visc_ = 0, cum_mu_ = 0;
    double cum_g1h_ = 0, cum_g2h_ = 0, cum_comph_ = 0;
    double cum_uh2_ = 0, cum_gp2_ = 0;
    double mart_u_ = 0, mart_mu_ = 0;
    std::vector<LedgerRecord> records_;
};

// E_lambda(phi, u) = 1/2 |grad phi|^2 + 1/2 |u|^2 + int F_lambda(phi)
double energy(const System& sys, const FieldState& state);

// LHS - RHS of the discrete energy identity between two recorded indices.
double ito_residual(const EnergyLedger& ledger, size_t rec_begin, size_t rec_end);

struct NoiseConstants {
    double c_g1_sq = 0.0;
    double l2_sq = 0.0;
    double measure = 0.0;  // |O|
};

struct VerdictRow {
    double t = 0.0;
    double lhs = 0.0, rhs = 0.0, se = 0.0, bias = 0.0;
    bool pass = false;
    double sup_mean_u_h2 = 0.0, sup_mean_gradphi2 = 0.0, sup_mean_fint = 0.0;
    double mean_dissipation = 0.0, mean_int_u_h2 = 0.0, mean_int_gradphi2 = 0.0;
};

struct EnergyVerdict {
    bool pass = false;
    std::vector<VerdictRow> rows;
    NoiseConstants constants;
    double bias_coeff = 0.0;
    double dt = 0.0;
    int members = 0;
};

// Monte-Carlo check of the energy inequality: at every recorded time,
// LHS <= RHS + 2 SE + bias_coeff * dt * t. Requires >= 2 members for the SE
// (>= 30 for a meaningful verdict; the caller enforces its own floor).
EnergyVerdict verify_energy_inequality(const std::vector<std::vector<LedgerRecord>>& members,
                                       const NoiseConstants& constants, double bias_coeff,
                                       double dt);

// |grad A^{-1}(u1 - u2)|^2 (squared dual-norm distance)
double dual_distance(const VectorField& u1, const VectorField& u2);

struct DependencePoint {
    double t = 0.0;
    double dual_u2 = 0.0;     // |grad A^{-1} (u1-u2)|^2
    double phi_h2 = 0.0;      // |phi1 - phi2|^2_H
    double cum_u_h2 = 0.0;    // int |u1-u2|^2 dt
    double cum_gradphi2 = 0.0;
    double stop_stat = 0.0;   // max over the pair of the stopping statistic
};

struct DependenceReport {
    double eps = 0.0;
    double initial_dist = 0.0;
    double final_dist = 0.0;
    double zeta_t = 0.0;  // T if the threshold is never hit
    std::vector<DependencePoint> series;
};

struct DependenceConfig {
    double T = 0.5;
    StepperConfig stepper;
    double n_level = 10.0;
    int record_cadence = 1;
    std::vector<double> eps_list;
};

// Paired-path runs from base and base + eps * direction on the same Wiener path.
std::vector<DependenceReport> dependence_experiment(
    const System& sys, const VectorField& u0, const ScalarField& phi0,
    const VectorField& du_dir, const ScalarField& dphi_dir, const IncrementSource& increments,
    const DependenceConfig& cfg);

struct DependenceFit {
    double slope = 0.0;       // fitted scaling of final distance vs eps
    double gronwall_c = 0.0;  // empirical C in exp(C (T + n^4))
    bool envelope_ok = false;
    bool zero_eps_exact = false;  // eps = 0 entry had identically zero distances
};
DependenceFit fit_dependence(const std::vector<DependenceReport>& reports, double T,
                             double n_level);

enum class ConvergenceKind { in_n, in_lambda, in_dt };

struct ConvergenceRung {
    double param = 0.0;
    double distance = 0.0;  // to the next rung of the ladder
};

struct ConvergenceReport {
    ConvergenceKind kind = ConvergenceKind::in_dt;
    std::vector<ConvergenceRung> rungs;
    std::vector<double> rates;  // log2 ratios of successive distances
    bool monotone = false;
};

ConvergenceReport convergence_in_dt(const System& sys, const FieldState& init, double T,
                                    StepperConfig cfg, int n_rungs = 3);

using PotentialFactory = std::function<std::unique_ptr<RegularizedPotential>(double lambda)>;
using InitialGenerator = std::function<std::pair<VectorField, ScalarField>(BasisPtr)>;

ConvergenceReport convergence_in_lambda(BasisPtr basis, const NoiseModel& noise,
                                        const PotentialFactory& potential_at,
                                        const InitialGenerator& initial_at,
                                        const std::vector<double>& lambdas, double T,
                                        StepperConfig cfg);

ConvergenceReport convergence_in_n(BasisConfig domain, const std::vector<int>& n_ladder,
                                   const RegularizedPotential& potential,
                                   const NoiseModel& noise, const InitialGenerator& initial_at,
                                   double T, StepperConfig cfg);

}  // namespace acns
