#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "acns/galerkin.hpp"

namespace acns {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainConfig {
    int n = 64;
    double length = 6.283185307179586;
    BoundaryMode boundary = BoundaryMode::periodic;
    double dealias_fraction = 2.0 / 3.0;
};

struct PotentialConfig {
    std::string kind = "flory_huggins";  // or "quadratic"
    double theta = 1.0;
    double theta0 = 2.0;
    double curvature = 1.0;  // quadratic kind only
};

struct RegularizationConfig {
    double lambda = 1e-2;
    double root_tolerance = 1e-12;
    int quadrature_order = 32;
};

struct NoiseConfig {
    uint64_t seed = 1;
    int k1 = 8;
    int k2 = 8;
    double sigma1 = 0.1;
    double sigma2 = 0.1;
    double decay = 2.0;
    std::string g1_kind = "additive";  // or "diagonal_multiplicative"
    double kappa = 0.0;
};

struct StepperJsonConfig {
    double dt = 1e-3;
    std::string scheme = "semi_implicit_em";  // or "fully_explicit_em"
    double T = 0.5;
    bool cfl_guard = true;
};

struct InitialConfig {
    std::string preset = "bubble";  // bubble | random-band | pure-phase |
                                    // pure-phase-with-defect | snapshot
    double amplitude = 0.8;
    double phi_mean = 0.0;
    double radius_frac = 0.25;
    double width_frac = 0.05;
    int band_kmax = 3;
    double velocity_amplitude = 0.0;
    double defect_depth = 0.5;
    uint64_t perturb_seed = 1234;
    std::string snapshot;
};

struct ObserverConfig {
    int cadence = 1;
    bool write_snapshots = true;
    bool dump_steps = false;
};

struct EnsembleJsonConfig {
    int members = 8;
    uint64_t base_seed = 7;
    int workers = 1;
};

struct DependenceJsonConfig {
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    double n_level = 10.0;
};

struct ConvergeJsonConfig {
    int dt_rungs = 3;
    std::vector<double> lambdas = {0.1, 0.05, 0.025};
    std::vector<int> n_ladder = {16, 32, 64};
};

struct VerificationConfig {
    double bias_coeff = -1.0;  // < 0: fit from a short fixed-path dt study
};

struct RunConfig {
    DomainConfig domain;
    PotentialConfig potential;
    RegularizationConfig regularization;
    NoiseConfig noise;
    StepperJsonConfig stepper;
    InitialConfig initial;
    ObserverConfig observers;
    EnsembleJsonConfig ensemble;
    DependenceJsonConfig dependence;
    ConvergeJsonConfig converge;
    VerificationConfig verification;
};

// Strict parse: unknown keys anywhere are an error; missing keys take defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string canonical_config_text(const RunConfig& cfg);

// Cross-field validation of every module precondition; throws ConfigError with
// all violations listed.
void validate_config(const RunConfig& cfg);

uint64_t config_hash(const RunConfig& cfg);

}  // namespace acns
