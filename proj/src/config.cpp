#include "acns/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace acns {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& scope, const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + scope + "." + it.key() + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    check_keys(root, "", {"domain", "potential", "regularization", "noise", "stepper",
                          "initial", "observers", "ensemble", "dependence", "converge",
                          "verification"});
    RunConfig cfg;

    if (root.contains("domain")) {
        const json& j = root["domain"];
        check_keys(j, "domain", {"n", "length", "boundary", "dealias_fraction"});
        read(j, "n", cfg.domain.n);
        read(j, "length", cfg.domain.length);
        read(j, "dealias_fraction", cfg.domain.dealias_fraction);
        std::string boundary = "periodic";
        read(j, "boundary", boundary);
        if (boundary == "periodic")
            cfg.domain.boundary = BoundaryMode::periodic;
        else if (boundary == "neumann_cosine")
            cfg.domain.boundary = BoundaryMode::neumann_cosine;
        else
            throw ConfigError("domain.boundary must be 'periodic' or 'neumann_cosine'");
    }
    if (root.contains("potential")) {
        const json& j = root["potential"];
        check_keys(j, "potential", {"kind", "theta", "theta0", "curvature"});
        read(j, "kind", cfg.potential.kind);
        read(j, "theta", cfg.potential.theta);
        read(j, "theta0", cfg.potential.theta0);
        read(j, "curvature", cfg.potential.curvature);
    }
    if (root.contains("regularization")) {
        const json& j = root["regularization"];
        check_keys(j, "regularization", {"lambda", "root_tolerance", "quadrature_order"});
        read(j, "lambda", cfg.regularization.lambda);
        read(j, "root_tolerance", cfg.regularization.root_tolerance);
        read(j, "quadrature_order", cfg.regularization.quadrature_order);
    }
    if (root.contains("noise")) {
        const json& j = root["noise"];
        check_keys(j, "noise", {"seed", "k1", "k2", "sigma1", "sigma2", "decay", "g1_kind",
                                "kappa"});
        read(j, "seed", cfg.noise.seed);
        read(j, "k1", cfg.noise.k1);
        read(j, "k2", cfg.noise.k2);
        read(j, "sigma1", cfg.noise.sigma1);
        read(j, "sigma2", cfg.noise.sigma2);
        read(j, "decay", cfg.noise.decay);
        read(j, "g1_kind", cfg.noise.g1_kind);
        read(j, "kappa", cfg.noise.kappa);
    }
    if (root.contains("stepper")) {
        const json& j = root["stepper"];
        check_keys(j, "stepper", {"dt", "scheme", "T", "cfl_guard"});
        read(j, "dt", cfg.stepper.dt);
        read(j, "scheme", cfg.stepper.scheme);
        read(j, "T", cfg.stepper.T);
        read(j, "cfl_guard", cfg.stepper.cfl_guard);
    }
    if (root.contains("initial")) {
        const json& j = root["initial"];
        check_keys(j, "initial",
                   {"preset", "amplitude", "phi_mean", "radius_frac", "width_frac",
                    "band_kmax", "velocity_amplitude", "defect_depth", "perturb_seed",
                    "snapshot"});
        read(j, "preset", cfg.initial.preset);
        read(j, "amplitude", cfg.initial.amplitude);
        read(j, "phi_mean", cfg.initial.phi_mean);
        read(j, "radius_frac", cfg.initial.radius_frac);
        read(j, "width_frac", cfg.initial.width_frac);
        read(j, "band_kmax", cfg.initial.band_kmax);
        read(j, "velocity_amplitude", cfg.initial.velocity_amplitude);
        read(j, "defect_depth", cfg.initial.defect_depth);
        read(j, "perturb_seed", cfg.initial.perturb_seed);
        read(j, "snapshot", cfg.initial.snapshot);
    }
    if (root.contains("observers")) {
        const json& j = root["observers"];
        check_keys(j, "observers", {"cadence", "write_snapshots", "dump_steps"});
        read(j, "cadence", cfg.observers.cadence);
        read(j, "write_snapshots", cfg.observers.write_snapshots);
        read(j, "dump_steps", cfg.observers.dump_steps);
    }
    if (root.contains("ensemble")) {
        const json& j = root["ensemble"];
        check_keys(j, "ensemble", {"members", "base_seed", "workers"});
        read(j, "members", cfg.ensemble.members);
        read(j, "base_seed", cfg.ensemble.base_seed);
        read(j, "workers", cfg.ensemble.workers);
    }
    if (root.contains("dependence")) {
        const json& j = root["dependence"];
        check_keys(j, "dependence", {"eps", "n_level"});
        read(j, "eps", cfg.dependence.eps);
        read(j, "n_level", cfg.dependence.n_level);
    }
    if (root.contains("converge")) {
        const json& j = root["converge"];
        check_keys(j, "converge", {"dt_rungs", "lambdas", "n_ladder"});
        read(j, "dt_rungs", cfg.converge.dt_rungs);
        read(j, "lambdas", cfg.converge.lambdas);
        read(j, "n_ladder", cfg.converge.n_ladder);
    }
    if (root.contains("verification")) {
        const json& j = root["verification"];
        check_keys(j, "verification", {"bias_coeff"});
        read(j, "bias_coeff", cfg.verification.bias_coeff);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config_text(ss.str());
    validate_config(cfg);
    return cfg;
}

std::string canonical_config_text(const RunConfig& c) {
    json j;
    j["domain"] = {{"n", c.domain.n},
                   {"length", c.domain.length},
                   {"boundary", c.domain.boundary == BoundaryMode::periodic
                                    ? "periodic"
                                    : "neumann_cosine"},
                   {"dealias_fraction", c.domain.dealias_fraction}};
    j["potential"] = {{"kind", c.potential.kind},
                      {"theta", c.potential.theta},
                      {"theta0", c.potential.theta0},
                      {"curvature", c.potential.curvature}};
    j["regularization"] = {{"lambda", c.regularization.lambda},
                           {"root_tolerance", c.regularization.root_tolerance},
                           {"quadrature_order", c.regularization.quadrature_order}};
    j["noise"] = {{"seed", c.noise.seed},     {"k1", c.noise.k1},
                  {"k2", c.noise.k2},         {"sigma1", c.noise.sigma1},
                  {"sigma2", c.noise.sigma2}, {"decay", c.noise.decay},
                  {"g1_kind", c.noise.g1_kind}, {"kappa", c.noise.kappa}};
    j["stepper"] = {{"dt", c.stepper.dt},
                    {"scheme", c.stepper.scheme},
                    {"T", c.stepper.T},
                    {"cfl_guard", c.stepper.cfl_guard}};
    j["initial"] = {{"preset", c.initial.preset},
                    {"amplitude", c.initial.amplitude},
                    {"phi_mean", c.initial.phi_mean},
                    {"radius_frac", c.initial.radius_frac},
                    {"width_frac", c.initial.width_frac},
                    {"band_kmax", c.initial.band_kmax},
                    {"velocity_amplitude", c.initial.velocity_amplitude},
                    {"defect_depth", c.initial.defect_depth},
                    {"perturb_seed", c.initial.perturb_seed},
                    {"snapshot", c.initial.snapshot}};
    j["observers"] = {{"cadence", c.observers.cadence},
                      {"write_snapshots", c.observers.write_snapshots},
                      {"dump_steps", c.observers.dump_steps}};
    j["ensemble"] = {{"members", c.ensemble.members},
                     {"base_seed", c.ensemble.base_seed},
                     {"workers", c.ensemble.workers}};
    j["dependence"] = {{"eps", c.dependence.eps}, {"n_level", c.dependence.n_level}};
    j["converge"] = {{"dt_rungs", c.converge.dt_rungs},
                     {"lambdas", c.converge.lambdas},
                     {"n_ladder", c.converge.n_ladder}};
    j["verification"] = {{"bias_coeff", c.verification.bias_coeff}};
    return j.dump(2) + "\n";
}

void validate_config(const RunConfig& c) {
    std::vector<std::string> errors;
    auto bad = [&](const std::string& msg) { errors.push_back(msg); };

    if (c.domain.n < 4 || c.domain.n % 2 != 0) bad("domain.n must be even and >= 4");
    if (!(c.domain.length > 0.0)) bad("domain.length must be positive");
    if (!(c.domain.dealias_fraction > 0.0 && c.domain.dealias_fraction <= 1.0))
        bad("domain.dealias_fraction must lie in (0,1]");
    if (c.domain.boundary == BoundaryMode::neumann_cosine &&
        (c.noise.k1 > 0 || c.initial.velocity_amplitude != 0.0))
        bad("neumann_cosine runs the decoupled phase equation: velocity noise and "
            "velocity initial data must be zero");

    if (c.potential.kind == "flory_huggins") {
        if (!(c.potential.theta > 0.0 && c.potential.theta < c.potential.theta0))
            bad("potential requires 0 < theta < theta0");
    } else if (c.potential.kind == "quadratic") {
        if (!(c.potential.curvature > 0.0)) bad("potential.curvature must be positive");
    } else {
        bad("potential.kind must be 'flory_huggins' or 'quadratic'");
    }

    if (!(c.regularization.lambda > 0.0 && c.regularization.lambda < 1.0))
        bad("regularization.lambda must lie in (0,1)");
    if (!(c.regularization.root_tolerance > 0.0))
        bad("regularization.root_tolerance must be positive");
    if (c.regularization.quadrature_order < 1)
        bad("regularization.quadrature_order must be >= 1");

    if (c.noise.k1 < 0 || c.noise.k2 < 0) bad("noise.k1 and noise.k2 must be >= 0");
    if (c.noise.decay < 0.0) bad("noise.decay must be >= 0");
    if (c.noise.g1_kind != "additive" && c.noise.g1_kind != "diagonal_multiplicative")
        bad("noise.g1_kind must be 'additive' or 'diagonal_multiplicative'");
    if (c.noise.kappa < 0.0) bad("noise.kappa must be >= 0");

    if (!(c.stepper.dt > 0.0)) bad("stepper.dt must be positive");
    if (!(c.stepper.T >= 0.0)) bad("stepper.T must be >= 0");
    if (c.stepper.scheme != "semi_implicit_em" && c.stepper.scheme != "fully_explicit_em")
        bad("stepper.scheme must be 'semi_implicit_em' or 'fully_explicit_em'");
    if (c.stepper.scheme == "fully_explicit_em" && c.stepper.dt > c.regularization.lambda)
        bad("fully explicit stepping requires dt <= lambda");

    const std::set<std::string> presets = {"bubble", "random-band", "pure-phase",
                                           "pure-phase-with-defect", "snapshot"};
    if (!presets.count(c.initial.preset)) bad("initial.preset unknown: " + c.initial.preset);
    if (c.initial.preset == "snapshot" && c.initial.snapshot.empty())
        bad("initial.preset 'snapshot' requires initial.snapshot path");
    if (std::fabs(c.initial.amplitude) > 1.0)
        bad("initial.amplitude must lie in [-1,1] (phase bound)");
    if (c.initial.preset == "pure-phase-with-defect" &&
        (c.initial.defect_depth < 0.0 || c.initial.defect_depth > 2.0))
        bad("initial.defect_depth must lie in [0,2]");

    if (c.observers.cadence < 1) bad("observers.cadence must be >= 1");
    if (c.ensemble.members < 1) bad("ensemble.members must be >= 1");
    if (c.ensemble.workers < 1) bad("ensemble.workers must be >= 1");
    for (double e : c.dependence.eps)
        if (e < 0.0) bad("dependence.eps entries must be >= 0");
    if (!(c.dependence.n_level > 0.0)) bad("dependence.n_level must be positive");
    if (c.converge.dt_rungs < 2) bad("converge.dt_rungs must be >= 2");

    if (!errors.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
}

uint64_t config_hash(const RunConfig& cfg) {
    std::string text = canonical_config_text(cfg);
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace acns
