#include <CLI11.hpp>

#include <iostream>

#include "neckflow/run.hpp"

namespace {

std::vector<neckflow::SweepAxis> parse_axes(const std::vector<std::string>& raw) {
    std::vector<neckflow::SweepAxis> axes;
    for (const auto& spec : raw) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw neckflow::ConfigError("--axis expects section.key=v1,v2,... got '" + spec + "'");
        }
        neckflow::SweepAxis axis;
        axis.key = spec.substr(0, eq);
        std::string values = spec.substr(eq + 1);
        size_t pos = 0;
        while (pos != std::string::npos) {
            const auto comma = values.find(',', pos);
            const std::string v = values.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (!v.empty()) axis.values.push_back(v);
            pos = comma == std::string::npos ? comma : comma + 1;
        }
        if (axis.values.empty()) {
            throw neckflow::ConfigError("--axis '" + spec + "' lists no values");
        }
        axes.push_back(std::move(axis));
    }
    return axes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neckflow - mean curvature flow of axially symmetric profiles with Neumann ends"};
    app.require_subcommand(1);

    std::string config_path, run_dir;
    std::vector<std::string> axis_specs;

    auto* run = app.add_subcommand("run", "evolve a profile and audit it");
    run->add_option("config", config_path, "run configuration file")->required();

    auto* sweep = app.add_subcommand("sweep", "run a family of configs across parameter axes");
    sweep->add_option("config", config_path, "template configuration file")->required();
    sweep->add_option("--axis", axis_specs, "section.key=v1,v2,... (repeatable)");

    auto* analyze = app.add_subcommand("analyze", "recompute monitors and analysis from a run directory");
    analyze->add_option("dir", run_dir, "completed run directory")->required();

    auto* report = app.add_subcommand("report", "emit plot-ready CSVs and a text summary");
    report->add_option("dir", run_dir, "completed run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return neckflow::cmd_run(neckflow::load_config(config_path));
        }
        if (sweep->parsed()) {
            return neckflow::cmd_sweep(neckflow::load_config(config_path), parse_axes(axis_specs));
        }
        if (analyze->parsed()) {
            return neckflow::cmd_analyze(run_dir);
        }
        if (report->parsed()) {
            return neckflow::cmd_report(run_dir);
        }
    } catch (const neckflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const neckflow::IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return neckflow::kExitIoFailure;
    } catch (const neckflow::NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return neckflow::kExitNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
