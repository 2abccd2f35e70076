// Command-line front end: run | ensemble | dependence | pressure | converge | validate.
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "acns/runner.hpp"
#include "acns/snapshot.hpp"

namespace {

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const acns::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const acns::BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin simulator for a stochastic two-phase flow model"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", traj_dir, kind = "in_dt";

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "path to the JSON run config")->required();
        cmd->add_option("-o,--out", out_dir, "output directory");
    };

    CLI::App* c_run = app.add_subcommand("run", "single trajectory with ledger and snapshots");
    add_config(c_run);
    CLI::App* c_ens =
        app.add_subcommand("ensemble", "Monte-Carlo ensemble and energy-inequality verdict");
    add_config(c_ens);
    CLI::App* c_dep =
        app.add_subcommand("dependence", "paired-path continuous-dependence experiment");
    add_config(c_dep);
    CLI::App* c_conv = app.add_subcommand("converge", "self-convergence studies");
    add_config(c_conv);
    c_conv->add_option("-k,--kind", kind, "in_dt | in_lambda | in_n");
    CLI::App* c_press =
        app.add_subcommand("pressure", "recover the pressure from a dumped trajectory");
    c_press->add_option("trajectory", traj_dir, "directory of a run with dump_steps")
        ->required();
    c_press->add_option("-o,--out", out_dir, "output directory");
    CLI::App* c_val = app.add_subcommand("validate", "parse and validate a config");
    c_val->add_option("config", config_path, "path to the JSON run config")->required();

    CLI11_PARSE(app, argc, argv);

    if (c_run->parsed())
        return guarded([&] { return acns::run_single(acns::load_config_file(config_path), out_dir); });
    if (c_ens->parsed())
        return guarded(
            [&] { return acns::run_ensemble(acns::load_config_file(config_path), out_dir); });
    if (c_dep->parsed())
        return guarded(
            [&] { return acns::run_dependence(acns::load_config_file(config_path), out_dir); });
    if (c_conv->parsed())
        return guarded([&] {
            return acns::run_converge(acns::load_config_file(config_path), kind, out_dir);
        });
    if (c_press->parsed())
        return guarded([&] { return acns::run_pressure(traj_dir, out_dir); });
    if (c_val->parsed())
        return guarded([&] {
            acns::RunConfig cfg = acns::load_config_file(config_path);
            std::cout << acns::canonical_config_text(cfg);
            return 0;
        });
    return 1;
}
