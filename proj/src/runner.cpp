#include "acns/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "acns/snapshot.hpp"
#include "json.hpp"

namespace acns {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

uint64_t sm64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

// --- minimal SVG line plots ---------------------------------------------------

struct SvgSeries {
    std::vector<double> x, y;
    std::string color;
    std::string label;
    bool markers = false;
};

class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool logx = false,
            bool logy = false)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
          logx_(logx), logy_(logy) {}

    void add(SvgSeries s) { series_.push_back(std::move(s)); }

    void write(const std::string& path) const {
        const double w = 720, h = 480, ml = 80, mr = 160, mt = 48, mb = 56;
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        auto tx = [&](double v) { return logx_ ? std::log10(v) : v; };
        auto ty = [&](double v) { return logy_ ? std::log10(v) : v; };
        for (const auto& s : series_)
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (logx_ && s.x[i] <= 0.0) continue;
                if (logy_ && s.y[i] <= 0.0) continue;
                xmin = std::min(xmin, tx(s.x[i]));
                xmax = std::max(xmax, tx(s.x[i]));
                ymin = std::min(ymin, ty(s.y[i]));
                ymax = std::max(ymax, ty(s.y[i]));
            }
        if (xmin > xmax) {
            xmin = 0;
            xmax = 1;
        }
        if (ymin > ymax) {
            ymin = 0;
            ymax = 1;
        }
        if (xmax - xmin < 1e-300) xmax = xmin + 1.0;
        if (ymax - ymin < 1e-300) ymax = ymin + 1.0;
        auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (w - ml - mr); };
        auto py = [&](double v) { return h - mb - (ty(v) - ymin) / (ymax - ymin) * (h - mt - mb); };

        std::string out;
        out += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string((int)w) +
               "' height='" + std::to_string((int)h) + "'>\n";
        out += "<rect width='100%' height='100%' fill='white'/>\n";
        out += "<text x='" + std::to_string((int)(w / 2)) +
               "' y='24' text-anchor='middle' font-size='16'>" + title_ + "</text>\n";
        // axes
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%g' y1='%g' x2='%g' y2='%g' stroke='black'/>\n", ml, h - mb,
                      w - mr, h - mb);
        out += buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%g' y1='%g' x2='%g' y2='%g' stroke='black'/>\n", ml, mt, ml,
                      h - mb);
        out += buf;
        for (int i = 0; i <= 5; ++i) {
            double fx = xmin + (xmax - xmin) * i / 5.0;
            double fy = ymin + (ymax - ymin) * i / 5.0;
            double vx = logx_ ? std::pow(10.0, fx) : fx;
            double vy = logy_ ? std::pow(10.0, fy) : fy;
            double sx = ml + (w - ml - mr) * i / 5.0;
            double sy = h - mb - (h - mt - mb) * i / 5.0;
            std::snprintf(buf, sizeof(buf),
                          "<text x='%g' y='%g' text-anchor='middle' font-size='11'>%.3g</text>\n",
                          sx, h - mb + 18, vx);
            out += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x='%g' y='%g' text-anchor='end' font-size='11'>%.3g</text>\n",
                          ml - 6, sy + 4, vy);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<text x='%g' y='%g' text-anchor='middle' font-size='13'>%s</text>\n",
                      (w - mr + ml) / 2, h - 16, xlabel_.c_str());
        out += buf;
        std::snprintf(
            buf, sizeof(buf),
            "<text x='18' y='%g' text-anchor='middle' font-size='13' transform='rotate(-90 "
            "18 %g)'>%s</text>\n",
            (h - mb + mt) / 2, (h - mb + mt) / 2, ylabel_.c_str());
        out += buf;

        int li = 0;
        for (const auto& s : series_) {
            std::string pts;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (logx_ && s.x[i] <= 0.0) continue;
                if (logy_ && s.y[i] <= 0.0) continue;
                std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
                pts += buf;
            }
            out += "<polyline fill='none' stroke='" + s.color + "' stroke-width='1.5' points='" +
                   pts + "'/>\n";
            if (s.markers)
                for (size_t i = 0; i < s.x.size(); ++i) {
                    if (logx_ && s.x[i] <= 0.0) continue;
                    if (logy_ && s.y[i] <= 0.0) continue;
                    std::snprintf(buf, sizeof(buf),
                                  "<circle cx='%.2f' cy='%.2f' r='3' fill='%s'/>\n", px(s.x[i]),
                                  py(s.y[i]), s.color.c_str());
                    out += buf;
                }
            std::snprintf(buf, sizeof(buf),
                          "<text x='%g' y='%g' font-size='12' fill='%s'>%s</text>\n", w - mr + 10,
                          mt + 16.0 * ++li, s.color.c_str(), s.label.c_str());
            out += buf;
        }
        out += "</svg>\n";
        write_text(path, out);
    }

private:
    std::string title_, xlabel_, ylabel_;
    bool logx_, logy_;
    std::vector<SvgSeries> series_;
};

json manifest_skeleton(const RunConfig& cfg, const std::string& command) {
    json m;
    m["format"] = "acns-run-manifest";
    m["version"] = 1;
    m["command"] = command;
    m["code_version"] = kCodeVersion;
    m["config_hash"] = hex64(config_hash(cfg));
    m["config"] = json::parse(canonical_config_text(cfg));
    return m;
}

NoiseConstants noise_constants(const BuiltSystem& bs) {
    NoiseConstants c;
    double cg = bs.noise.c_g1();
    c.c_g1_sq = cg * cg;
    c.l2_sq = bs.noise.l2_sq(bs.potential->compensation_sup());
    c.measure = bs.basis->measure();
    return c;
}

}  // namespace

uint64_t derive_member_seed(uint64_t base_seed, int member) {
    return sm64(sm64(base_seed + 0x9E3779B97F4A7C15ull) ^
                (static_cast<uint64_t>(member) * 0xD6E8FEB86659FD93ull + 1));
}

int effective_workers(const RunConfig& cfg) {
    if (const char* env = std::getenv("ACNS_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(v);
    }
    return cfg.ensemble.workers;
}

BuiltSystem build_system_with_seed(const RunConfig& cfg, uint64_t seed) {
    BuiltSystem bs;
    BasisConfig bc;
    bc.grid_n = cfg.domain.n;
    bc.length = cfg.domain.length;
    bc.boundary = cfg.domain.boundary;
    bc.dealias_fraction = cfg.domain.dealias_fraction;
    bs.basis = build_basis(bc);

    if (cfg.potential.kind == "quadratic") {
        bs.potential = std::make_unique<QuadraticPotential>(cfg.potential.curvature,
                                                            cfg.regularization.lambda);
    } else {
        PotentialSpec spec = PotentialSpec::make(cfg.potential.theta, cfg.potential.theta0);
        YosidaLayer layer;
        layer.lambda = cfg.regularization.lambda;
        layer.root_tolerance = cfg.regularization.root_tolerance;
        layer.quadrature_order = cfg.regularization.quadrature_order;
        bs.potential = std::make_unique<FloryHugginsYosida>(spec, layer);
    }

    G1Kind kind = cfg.noise.g1_kind == "diagonal_multiplicative"
                      ? G1Kind::diagonal_multiplicative
                      : G1Kind::additive;
    int k1 = cfg.domain.boundary == BoundaryMode::neumann_cosine ? 0 : cfg.noise.k1;
    bs.noise = NoiseModel::make(k1, cfg.noise.k2, cfg.noise.sigma1, cfg.noise.sigma2,
                                cfg.noise.decay, kind, cfg.noise.kappa, seed);
    if (static_cast<size_t>(bs.noise.k1) > bs.basis->n_vector())
        throw ConfigError("noise.k1 exceeds the number of retained velocity modes");
    return bs;
}

BuiltSystem build_system(const RunConfig& cfg) {
    return build_system_with_seed(cfg, cfg.noise.seed);
}

std::pair<VectorField, ScalarField> build_initial(const RunConfig& cfg, const BasisPtr& basis) {
    const auto& b = *basis;
    const int n = b.grid_n();
    const double l = b.length();
    VectorField u(basis);
    ScalarField phi(basis);
    const InitialConfig& ic = cfg.initial;

    auto fill_from = [&](const std::function<double(double, double)>& f) {
        std::vector<double> grid(static_cast<size_t>(n) * n);
        const bool midpoint = b.boundary() == BoundaryMode::neumann_cosine;
        for (int i = 0; i < n; ++i) {
            double x = midpoint ? (i + 0.5) * l / n : i * l / n;
            for (int j = 0; j < n; ++j) {
                double y = midpoint ? (j + 0.5) * l / n : j * l / n;
                grid[static_cast<size_t>(i) * n + j] = f(x, y);
            }
        }
        b.scalar_from_grid(grid.data(), phi.coeff.data());
    };

    if (ic.preset == "snapshot") {
        throw ConfigError("snapshot initial data must be loaded by the caller with the "
                          "system at hand");
    } else if (ic.preset == "bubble") {
        const double r0 = ic.radius_frac * l;
        const double w = std::max(1e-9, ic.width_frac * l);
        const double c = 0.5 * l;
        fill_from([&](double x, double y) {
            double r = std::sqrt((x - c) * (x - c) + (y - c) * (y - c));
            return -ic.amplitude + 2.0 * ic.amplitude * 0.5 * (1.0 - std::tanh((r - r0) / w));
        });
    } else if (ic.preset == "pure-phase") {
        phi = constant_field(basis, 1.0);
    } else if (ic.preset == "pure-phase-with-defect") {
        const double w = std::max(1e-9, ic.width_frac * l);
        const double c = 0.5 * l;
        fill_from([&](double x, double y) {
            double r2 = (x - c) * (x - c) + (y - c) * (y - c);
            return 1.0 - ic.defect_depth * std::exp(-r2 / (2.0 * w * w));
        });
    } else if (ic.preset == "random-band") {
        const auto& modes = b.scalar_modes();
        long band2 = static_cast<long>(ic.band_kmax) * ic.band_kmax;
        for (size_t i = 0; i < modes.size(); ++i) {
            long k2 = static_cast<long>(modes[i].k1) * modes[i].k1 +
                      static_cast<long>(modes[i].k2) * modes[i].k2;
            if (k2 == 0 || k2 > band2) continue;
            phi.coeff[i] = stateless_normal(ic.perturb_seed, 3, i, 0);
        }
        GridStats gs = scalar_grid_stats(phi);
        if (gs.max_abs > 0.0) {
            double scale = ic.amplitude / gs.max_abs;
            for (double& c : phi.coeff) c *= scale;
        }
        phi.coeff[0] += ic.phi_mean * l;  // constant basis function is 1/L
    }

    // projection onto the retained band can overshoot (Gibbs); rescale so the
    // grid values respect the phase bound exactly
    if (ic.preset != "pure-phase") {
        GridStats gs = scalar_grid_stats(phi);
        if (gs.max_abs > 1.0) {
            double scale = 1.0 / gs.max_abs;
            for (double& c : phi.coeff) c *= scale;
        }
    }

    if (ic.velocity_amplitude != 0.0 && b.boundary() == BoundaryMode::periodic) {
        if (ic.preset == "random-band") {
            const auto& vmodes = b.vector_modes();
            long band2 = static_cast<long>(ic.band_kmax) * ic.band_kmax;
            for (size_t k = 0; k < vmodes.size(); ++k) {
                long k2 = static_cast<long>(vmodes[k].k1) * vmodes[k].k1 +
                          static_cast<long>(vmodes[k].k2) * vmodes[k].k2;
                if (k2 > band2) continue;
                u.coeff[k] = stateless_normal(ic.perturb_seed, 4, k, 0);
            }
            double norm = std::sqrt(inner_hsigma(u, u));
            if (norm > 0.0) {
                double scale = ic.velocity_amplitude / norm;
                for (double& c : u.coeff) c *= scale;
            }
        } else {
            // two lowest shear modes; enough structure for a nontrivial B(u,u)
            if (u.coeff.size() >= 4) {
                u.coeff[0] = ic.velocity_amplitude;
                u.coeff[3] = 0.7 * ic.velocity_amplitude;
            }
        }
    }
    return {std::move(u), std::move(phi)};
}

double fit_bias_coefficient(const RunConfig& cfg) {
    // short deterministic study on a fixed path: residual(dt) ~ a dt T
    RunConfig c = cfg;
    BuiltSystem bs = build_system(c);
    System sys = bs.system();
    auto [u0, phi0] = build_initial(c, bs.basis);
    const double t_fit = std::min(0.05, cfg.stepper.T > 0 ? cfg.stepper.T : 0.05);
    double a = 0.0;
    for (int half = 0; half < 2; ++half) {
        double dt = cfg.stepper.dt / (half ? 2.0 : 1.0);
        StepperConfig sc;
        sc.dt = dt;
        sc.scheme = cfg.stepper.scheme == "fully_explicit_em" ? Scheme::fully_explicit_em
                                                              : Scheme::semi_implicit_em;
        EnergyLedger ledger(sys, 1);
        FieldState st = make_state(sys, u0, phi0);
        ledger.start(st);
        AggregatedIncrementSource src(bs.noise, cfg.stepper.dt / 2.0, half ? 1 : 2);
        SimulateOptions opts;
        opts.on_step = ledger.hook();
        simulate(sys, std::move(st), t_fit, sc, src, opts);
        double res = std::fabs(ito_residual(ledger, 0, ledger.records().size() - 1));
        a = std::max(a, res / (dt * t_fit));
    }
    return 2.0 * a;  // safety factor
}

EnsembleResult ensemble_verify(const RunConfig& cfg, int workers) {
    const int m_count = cfg.ensemble.members;
    if (workers <= 0) workers = effective_workers(cfg);
    workers = std::min(workers, m_count);

    EnsembleResult result;
    result.bias_coeff = cfg.verification.bias_coeff >= 0.0 ? cfg.verification.bias_coeff
                                                           : fit_bias_coefficient(cfg);
    result.member_records.resize(m_count);

    BuiltSystem shared = build_system(cfg);  // for constants and the shared basis
    std::vector<std::string> errors(m_count);
    std::atomic<int> next{0};
    auto worker_fn = [&]() {
        for (;;) {
            int m = next.fetch_add(1);
            if (m >= m_count) return;
            try {
                uint64_t seed = derive_member_seed(cfg.ensemble.base_seed, m);
                NoiseModel noise = shared.noise;
                noise.seed = seed;
                System sys{shared.basis, shared.potential.get(), &noise};
                auto [u0, phi0] = build_initial(cfg, shared.basis);
                EnergyLedger ledger(sys, cfg.observers.cadence);
                FieldState st = make_state(sys, std::move(u0), std::move(phi0));
                ledger.start(st);
                StepperConfig sc;
                sc.dt = cfg.stepper.dt;
                sc.scheme = cfg.stepper.scheme == "fully_explicit_em"
                                ? Scheme::fully_explicit_em
                                : Scheme::semi_implicit_em;
                RngIncrementSource src(noise, sc.dt);
                SimulateOptions opts;
                opts.on_step = ledger.hook();
                simulate(sys, std::move(st), cfg.stepper.T, sc, src, opts);
                result.member_records[m] = ledger.records();
            } catch (const std::exception& e) {
                errors[m] = e.what();
            }
        }
    };
    if (workers <= 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }
    std::string failure;
    for (int m = 0; m < m_count; ++m)
        if (!errors[m].empty())
            failure += "member " + std::to_string(m) + ": " + errors[m] + "\n";
    if (!failure.empty())
        throw std::runtime_error("ensemble members failed; aggregation refused:\n" + failure);

    result.verdict = verify_energy_inequality(result.member_records, noise_constants(shared),
                                              result.bias_coeff, cfg.stepper.dt);
    return result;
}

// --- subcommands ---------------------------------------------------------------

namespace {

void write_manifest(const std::string& out_dir, json manifest) {
    write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void write_timing(const std::string& out_dir, double seconds) {
    json t;
    t["wall_clock_seconds"] = seconds;
    write_text(out_dir + "/timing.json", t.dump(2) + "\n");
}

class WallClock {
public:
    WallClock() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace

int run_single(const RunConfig& cfg, const std::string& out_dir) {
    WallClock clock;
    fs::create_directories(out_dir);
    BuiltSystem bs = build_system(cfg);
    System sys = bs.system();

    json manifest = manifest_skeleton(cfg, "run");
    manifest["member_seeds"] = {cfg.noise.seed};
    std::vector<std::string> files = {"manifest.json", "summary.json", "ledger.csv"};
    if (cfg.observers.write_snapshots) files.push_back("initial.snap");

    FieldState st;
    if (cfg.initial.preset == "snapshot") {
        st = read_state_snapshot(cfg.initial.snapshot, sys);
        st.mu = assemble_mu(sys, st.phi);
        st.lambda = bs.potential->lambda();
        st.t = 0.0;
    } else {
        auto [u0, phi0] = build_initial(cfg, bs.basis);
        st = make_state(sys, std::move(u0), std::move(phi0));
    }

    const int n_steps = static_cast<int>(std::ceil(cfg.stepper.T / cfg.stepper.dt - 1e-12));
    const bool dump = cfg.observers.dump_steps && n_steps > 0;
    if (dump) files.push_back("increments.bin");
    if (cfg.observers.write_snapshots && n_steps > 0) files.push_back("final.snap");
    manifest["files"] = files;
    write_manifest(out_dir, manifest);  // manifest first

    if (cfg.observers.write_snapshots) write_state_snapshot(out_dir + "/initial.snap", st);

    StepperConfig sc;
    sc.dt = cfg.stepper.dt;
    sc.scheme = cfg.stepper.scheme == "fully_explicit_em" ? Scheme::fully_explicit_em
                                                          : Scheme::semi_implicit_em;
    EnergyLedger ledger(sys, cfg.observers.cadence);
    ledger.start(st);
    RngIncrementSource src(bs.noise, sc.dt);
    std::vector<WienerIncrement> increments;
    if (dump) {
        fs::create_directories(out_dir + "/steps");
        char name[64];
        std::snprintf(name, sizeof(name), "/steps/step_%06d.snap", 0);
        write_state_snapshot(out_dir + name, st);
    }
    SimulateOptions opts;
    opts.on_step = [&](const FieldState& prev, const FieldState& next, const StepData& data,
                       int step) {
        ledger.on_step(prev, next, data, step);
        if (dump) {
            increments.push_back(data.dw);
            char name[64];
            std::snprintf(name, sizeof(name), "/steps/step_%06d.snap", step + 1);
            write_state_snapshot(out_dir + name, next);
        }
    };

    TrajectoryStats stats;
    int exit_code = 0;
    json summary;
    try {
        FieldState finalst = simulate(sys, std::move(st), cfg.stepper.T, sc, src, opts, &stats);
        if (cfg.observers.write_snapshots && n_steps > 0)
            write_state_snapshot(out_dir + "/final.snap", finalst);
        summary["status"] = "ok";
        summary["steps"] = stats.steps;
        summary["t_final"] = finalst.t;
        summary["energy_final"] = energy(sys, finalst);
        summary["u_h_norm"] = std::sqrt(inner_hsigma(finalst.u, finalst.u));
        summary["phi_h_norm"] = scalar_norm(finalst.phi, NormKind::H);
        summary["max_phase_abs"] = stats.max_phase_abs;
        summary["max_exceed_frac"] = stats.max_exceed_frac;
    } catch (const BlowUpError& e) {
        summary["status"] = "blow_up";
        summary["what"] = e.what();
        summary["step"] = e.step;
        summary["t"] = e.t;
        exit_code = 3;
    }
    ledger.write_csv(out_dir + "/ledger.csv");
    if (dump) write_increments(out_dir + "/increments.bin", increments);
    write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
    write_timing(out_dir, clock.seconds());
    return exit_code;
}

int run_ensemble(const RunConfig& cfg, const std::string& out_dir) {
    WallClock clock;
    fs::create_directories(out_dir);
    json manifest = manifest_skeleton(cfg, "ensemble");
    std::vector<uint64_t> seeds;
    for (int m = 0; m < cfg.ensemble.members; ++m)
        seeds.push_back(derive_member_seed(cfg.ensemble.base_seed, m));
    json jseeds = json::array();
    for (uint64_t s : seeds) jseeds.push_back(hex64(s));
    manifest["member_seeds"] = jseeds;
    manifest["files"] = {"manifest.json", "verdict.json", "term_table.csv",
                         "energy_plot.svg"};
    write_manifest(out_dir, manifest);

    EnsembleResult res;
    try {
        res = ensemble_verify(cfg, 0);
    } catch (const std::exception& e) {
        write_text(out_dir + "/verdict.json",
                   json{{"status", "failed"}, {"what", e.what()}}.dump(2) + "\n");
        write_timing(out_dir, clock.seconds());
        return 3;
    }

    json verdict;
    verdict["status"] = "ok";
    verdict["pass"] = res.verdict.pass;
    verdict["members"] = res.verdict.members;
    verdict["bias_coeff"] = res.bias_coeff;
    verdict["dt"] = res.verdict.dt;
    verdict["constants"] = {{"c_g1_sq", res.verdict.constants.c_g1_sq},
                            {"l2_sq", res.verdict.constants.l2_sq},
                            {"measure", res.verdict.constants.measure}};
    json rows = json::array();
    for (const auto& r : res.verdict.rows) {
        rows.push_back({{"t", r.t},
                        {"lhs", r.lhs},
                        {"rhs", r.rhs},
                        {"se", r.se},
                        {"bias", r.bias},
                        {"pass", r.pass}});
    }
    verdict["rows"] = rows;
    write_text(out_dir + "/verdict.json", verdict.dump(2) + "\n");

    std::string csv =
        "t,lhs,rhs,se,bias,pass,sup_mean_u_h2,sup_mean_gradphi2,sup_mean_fint,"
        "mean_dissipation,mean_int_u_h2,mean_int_gradphi2\n";
    for (const auto& r : res.verdict.rows) {
        csv += fmt_g(r.t) + "," + fmt_g(r.lhs) + "," + fmt_g(r.rhs) + "," + fmt_g(r.se) + "," +
               fmt_g(r.bias) + "," + (r.pass ? "1" : "0") + "," + fmt_g(r.sup_mean_u_h2) + "," +
               fmt_g(r.sup_mean_gradphi2) + "," + fmt_g(r.sup_mean_fint) + "," +
               fmt_g(r.mean_dissipation) + "," + fmt_g(r.mean_int_u_h2) + "," +
               fmt_g(r.mean_int_gradphi2) + "\n";
    }
    write_text(out_dir + "/term_table.csv", csv);

    SvgPlot plot("ensemble energy inequality", "t", "value");
    SvgSeries lhs{{}, {}, "#c0392b", "LHS", false};
    SvgSeries rhs{{}, {}, "#2980b9", "RHS + 2SE + bias", false};
    SvgSeries mean_e{{}, {}, "#27ae60", "mean energy", false};
    for (const auto& r : res.verdict.rows) {
        lhs.x.push_back(r.t);
        lhs.y.push_back(r.lhs);
        rhs.x.push_back(r.t);
        rhs.y.push_back(r.rhs + 2.0 * r.se + r.bias);
        mean_e.x.push_back(r.t);
        mean_e.y.push_back(0.5 * r.sup_mean_u_h2 + 0.5 * r.sup_mean_gradphi2 +
                           r.sup_mean_fint);
    }
    plot.add(lhs);
    plot.add(rhs);
    plot.add(mean_e);
    plot.write(out_dir + "/energy_plot.svg");

    write_timing(out_dir, clock.seconds());
    return res.verdict.pass ? 0 : 1;
}

int run_dependence(const RunConfig& cfg, const std::string& out_dir) {
    WallClock clock;
    fs::create_directories(out_dir);
    if (cfg.dependence.eps.empty())
        throw ConfigError("dependence requires a non-empty eps list");
    json manifest = manifest_skeleton(cfg, "dependence");
    manifest["files"] = {"manifest.json", "dependence.json", "dependence.csv",
                         "dependence_scaling.svg"};
    write_manifest(out_dir, manifest);

    BuiltSystem bs = build_system(cfg);
    System sys = bs.system();
    auto [u0, phi0] = build_initial(cfg, bs.basis);

    // deterministic unit perturbation directions in the metrics of the estimate
    VectorField du(bs.basis);
    ScalarField dphi(bs.basis);
    const auto& vmodes = bs.basis->vector_modes();
    for (size_t k = 0; k < vmodes.size(); ++k) {
        long k2 = static_cast<long>(vmodes[k].k1) * vmodes[k].k1 +
                  static_cast<long>(vmodes[k].k2) * vmodes[k].k2;
        if (k2 <= 4) du.coeff[k] = stateless_normal(cfg.initial.perturb_seed, 5, k, 0);
    }
    const auto& smodes = bs.basis->scalar_modes();
    for (size_t i = 1; i < smodes.size(); ++i) {
        long k2 = static_cast<long>(smodes[i].k1) * smodes[i].k1 +
                  static_cast<long>(smodes[i].k2) * smodes[i].k2;
        if (k2 <= 4) dphi.coeff[i] = stateless_normal(cfg.initial.perturb_seed, 6, i, 0);
    }
    VectorField zero_u(bs.basis);
    double du_norm = std::sqrt(dual_distance(du, zero_u));
    if (du_norm > 0.0)
        for (double& c : du.coeff) c /= du_norm;
    double dphi_norm = scalar_norm(dphi, NormKind::H);
    if (dphi_norm > 0.0)
        for (double& c : dphi.coeff) c /= dphi_norm;

    DependenceConfig dc;
    dc.T = cfg.stepper.T;
    dc.stepper.dt = cfg.stepper.dt;
    dc.stepper.scheme = cfg.stepper.scheme == "fully_explicit_em"
                            ? Scheme::fully_explicit_em
                            : Scheme::semi_implicit_em;
    dc.n_level = cfg.dependence.n_level;
    dc.record_cadence = cfg.observers.cadence;
    dc.eps_list = cfg.dependence.eps;

    RngIncrementSource src(bs.noise, dc.stepper.dt);
    std::vector<DependenceReport> reports =
        dependence_experiment(sys, u0, phi0, du, dphi, src, dc);
    DependenceFit fit = fit_dependence(reports, dc.T, dc.n_level);

    json out;
    out["fit"] = {{"slope", fit.slope},
                  {"gronwall_c", fit.gronwall_c},
                  {"envelope_ok", fit.envelope_ok},
                  {"zero_eps_exact", fit.zero_eps_exact}};
    json jreports = json::array();
    for (const auto& r : reports) {
        jreports.push_back({{"eps", r.eps},
                            {"initial_dist", r.initial_dist},
                            {"final_dist", r.final_dist},
                            {"zeta_t", r.zeta_t}});
    }
    out["reports"] = jreports;
    write_text(out_dir + "/dependence.json", out.dump(2) + "\n");

    std::string csv = "eps,t,dual_u2,phi_h2,cum_u_h2,cum_gradphi2,stop_stat\n";
    for (const auto& r : reports)
        for (const auto& p : r.series)
            csv += fmt_g(r.eps) + "," + fmt_g(p.t) + "," + fmt_g(p.dual_u2) + "," +
                   fmt_g(p.phi_h2) + "," + fmt_g(p.cum_u_h2) + "," + fmt_g(p.cum_gradphi2) +
                   "," + fmt_g(p.stop_stat) + "\n";
    write_text(out_dir + "/dependence.csv", csv);

    SvgPlot plot("stopped final distance vs perturbation size", "eps", "final distance", true,
                 true);
    SvgSeries pts{{}, {}, "#8e44ad", "observed", true};
    for (const auto& r : reports) {
        if (r.eps > 0.0 && r.final_dist > 0.0) {
            pts.x.push_back(r.eps);
            pts.y.push_back(r.final_dist);
        }
    }
    plot.add(pts);
    plot.write(out_dir + "/dependence_scaling.svg");

    write_timing(out_dir, clock.seconds());
    return 0;
}

int run_pressure(const std::string& trajectory_dir, const std::string& out_dir) {
    WallClock clock;
    std::ifstream mf(trajectory_dir + "/manifest.json");
    if (!mf) throw ConfigError("no manifest.json in " + trajectory_dir);
    json manifest = json::parse(mf);
    RunConfig cfg = parse_config_text(manifest.at("config").dump());
    validate_config(cfg);
    if (!cfg.observers.dump_steps)
        throw ConfigError("trajectory was not recorded with observers.dump_steps");

    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/pressure");
    BuiltSystem bs = build_system(cfg);
    System sys = bs.system();

    std::vector<WienerIncrement> increments =
        read_increments(trajectory_dir + "/increments.bin");
    std::vector<FieldState> states;
    for (size_t m = 0;; ++m) {
        char name[64];
        std::snprintf(name, sizeof(name), "/steps/step_%06zu.snap", m);
        std::string path = trajectory_dir + name;
        if (!fs::exists(path)) break;
        states.push_back(read_state_snapshot(path, sys));
    }
    if (states.size() != increments.size() + 1)
        throw std::runtime_error("trajectory steps and increments are inconsistent");

    // reconstruct the applied G1 increments from the stored states
    std::vector<std::vector<double>> g1;
    for (size_t m = 0; m + 1 < states.size(); ++m) {
        VectorField inc = apply_G1(bs.noise, states[m].u, increments[m].dw1);
        g1.push_back(std::move(inc.coeff));
    }

    Scheme scheme = cfg.stepper.scheme == "fully_explicit_em" ? Scheme::fully_explicit_em
                                                              : Scheme::semi_implicit_em;
    PressureSeries series =
        build_pressure_series(sys, states, g1, cfg.stepper.dt, scheme);
    PressureNormReport rep = pressure_norm_report(sys, series, states, cfg.stepper.dt);

    for (size_t m = 0; m < series.pi.size(); ++m) {
        FieldState ps;
        ps.t = series.steps[m].t;
        ps.lambda = cfg.regularization.lambda;
        ps.u = VectorField(bs.basis);
        ps.phi = series.pi[m];
        ps.mu = ScalarField(bs.basis);
        char name[64];
        std::snprintf(name, sizeof(name), "/pressure/step_%06zu.snap", m);
        write_state_snapshot(out_dir + name, ps);
    }

    std::string csv = "t,pi_mean,closure_residual,h_norm,pi_h_norm\n";
    for (const auto& s : series.steps)
        csv += fmt_g(s.t) + "," + fmt_g(s.pi_mean) + "," + fmt_g(s.closure_residual) + "," +
               fmt_g(s.h_norm) + "," + fmt_g(s.pi_h_norm) + "\n";
    write_text(out_dir + "/pressure_report.csv", csv);

    json jn;
    jn["primitive_norm_max"] = rep.lhs_proxy;
    jn["u_linf_h"] = rep.u_linf_h;
    jn["u_l2_vsig"] = rep.u_l2_vsig;
    jn["u_l2_vsig_sq"] = rep.u_l2_vsig_sq;
    jn["phi_l2_v2_sq"] = rep.phi_l2_v2_sq;
    jn["fprime_l2_sq"] = rep.fprime_l2_sq;
    jn["rhs_factors"] = rep.rhs_factors;
    jn["ratio"] = rep.ratio;
    write_text(out_dir + "/pressure_norms.json", jn.dump(2) + "\n");

    write_timing(out_dir, clock.seconds());
    return 0;
}

int run_converge(const RunConfig& cfg, const std::string& kind, const std::string& out_dir) {
    WallClock clock;
    fs::create_directories(out_dir);
    json manifest = manifest_skeleton(cfg, "converge:" + kind);
    manifest["files"] = {"manifest.json", "converge_" + kind + ".json"};
    write_manifest(out_dir, manifest);

    BuiltSystem bs = build_system(cfg);
    StepperConfig sc;
    sc.dt = cfg.stepper.dt;
    sc.scheme = cfg.stepper.scheme == "fully_explicit_em" ? Scheme::fully_explicit_em
                                                          : Scheme::semi_implicit_em;
    ConvergenceReport rep;
    if (kind == "in_dt") {
        System sys = bs.system();
        auto [u0, phi0] = build_initial(cfg, bs.basis);
        FieldState init = make_state(sys, std::move(u0), std::move(phi0));
        rep = convergence_in_dt(sys, init, cfg.stepper.T, sc, cfg.converge.dt_rungs);
    } else if (kind == "in_lambda") {
        PotentialFactory factory;
        if (cfg.potential.kind == "quadratic") {
            double curv = cfg.potential.curvature;
            factory = [curv](double lam) -> std::unique_ptr<RegularizedPotential> {
                return std::make_unique<QuadraticPotential>(curv, lam);
            };
        } else {
            PotentialSpec spec = PotentialSpec::make(cfg.potential.theta, cfg.potential.theta0);
            YosidaLayer layer;
            layer.root_tolerance = cfg.regularization.root_tolerance;
            layer.quadrature_order = cfg.regularization.quadrature_order;
            factory = [spec, layer](double lam) -> std::unique_ptr<RegularizedPotential> {
                YosidaLayer l = layer;
                l.lambda = lam;
                return std::make_unique<FloryHugginsYosida>(spec, l);
            };
        }
        InitialGenerator gen = [&cfg](BasisPtr basis) { return build_initial(cfg, basis); };
        rep = convergence_in_lambda(bs.basis, bs.noise, factory, gen, cfg.converge.lambdas,
                                    cfg.stepper.T, sc);
    } else if (kind == "in_n") {
        BasisConfig bc;
        bc.grid_n = cfg.domain.n;
        bc.length = cfg.domain.length;
        bc.boundary = cfg.domain.boundary;
        bc.dealias_fraction = cfg.domain.dealias_fraction;
        InitialGenerator gen = [&cfg](BasisPtr basis) { return build_initial(cfg, basis); };
        rep = convergence_in_n(bc, cfg.converge.n_ladder, *bs.potential, bs.noise, gen,
                               cfg.stepper.T, sc);
    } else {
        throw ConfigError("converge kind must be in_dt, in_lambda, or in_n");
    }

    json out;
    out["kind"] = kind;
    out["monotone"] = rep.monotone;
    json rungs = json::array();
    for (const auto& r : rep.rungs) rungs.push_back({{"param", r.param}, {"distance", r.distance}});
    out["rungs"] = rungs;
    out["rates"] = rep.rates;
    write_text(out_dir + "/converge_" + kind + ".json", out.dump(2) + "\n");
    write_timing(out_dir, clock.seconds());
    return 0;
}

}  // namespace acns
