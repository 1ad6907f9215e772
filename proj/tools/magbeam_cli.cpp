#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "magbeam/scenario.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("MAGBEAM_LOG");
    return env ? std::atoi(env) : 0;
}

magbeam::Scenario load_with_overrides(const std::string& path, const std::string& mode,
                                      double tol, std::uint64_t seed, double beta0) {
    magbeam::Scenario s = magbeam::load_scenario(path);
    if (!mode.empty()) s.solve.mode = magbeam::solve_mode_from_string(mode);
    if (tol > 0.0) s.solve.tol = tol;
    if (seed != 0) s.solve.seed = seed;
    if (beta0 > 0.0) {
        s.solve.beta0_w = beta0;
        s.solve.sweep.reset();
    }
    return s;
}

void write_or_print(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw magbeam::Error("cannot open output file " + out);
    f << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-transmitter wireless power transfer current optimizer"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, mode_override;
    double tol = 0.0, beta0 = 0.0;
    std::uint64_t seed = 0;
    bool timing = false;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
        if (needs_scenario)
            cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out", out_path, "write output to this file instead of stdout");
        cmd->add_option("--mode", mode_override,
                        "override solve.mode (closedform|sdp|equal_current|oracle|all)");
        cmd->add_option("--tol", tol, "override solver tolerance");
        cmd->add_option("--seed", seed, "override oracle seed");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve a single operating point");
    add_common(solve);
    solve->add_option("--beta0", beta0, "override the load-power target (W)");
    solve->add_flag("--timing", timing, "include wall-clock timings in the report");
    bool as_json = false;
    solve->add_flag("--json", as_json, "emit the machine-readable JSON report");

    CLI::App* sweep = app.add_subcommand("sweep", "run a load-power sweep, emit CSV");
    add_common(sweep);
    sweep->add_flag("--timing", timing, "include wall-clock timings in the CSV");

    CLI::App* maxpower =
        app.add_subcommand("maxpower", "largest deliverable load power per scheme");
    add_common(maxpower);
    bool max_json = false;
    maxpower->add_flag("--json", max_json, "emit the machine-readable JSON report");

    CLI::App* geometry = app.add_subcommand(
        "geometry", "synthesize inductances from the scenario's geometry block");
    add_common(geometry);

    CLI::App* validate = app.add_subcommand("validate", "parse and schema-check a scenario");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            const magbeam::Scenario s =
                load_with_overrides(scenario_path, mode_override, tol, seed, beta0);
            magbeam::RunOptions opt;
            opt.include_timing = timing;
            const magbeam::SolveReport report = magbeam::run_solve(s, opt);
            write_or_print(out_path, as_json ? report.to_json_text() : report.to_text());
            if (report.exit_code == 2 && log_level() > 0)
                std::cerr << "infeasible: the load-power target exceeds the deliverable "
                             "maximum under the peak limits\n";
            return report.exit_code;
        }
        if (sweep->parsed()) {
            const magbeam::Scenario s =
                load_with_overrides(scenario_path, mode_override, tol, seed, 0.0);
            magbeam::RunOptions opt;
            opt.include_timing = timing;
            const auto records = magbeam::run_sweep(s, opt);
            write_or_print(out_path,
                           magbeam::sweep_to_csv(records, static_cast<int>(s.tx.size())));
            return 0;
        }
        if (maxpower->parsed()) {
            const magbeam::Scenario s =
                load_with_overrides(scenario_path, mode_override, tol, seed, 0.0);
            const magbeam::MaxPowerReport report = magbeam::run_maxpower(s);
            write_or_print(out_path, max_json ? report.to_json_text() : report.to_text());
            return 0;
        }
        if (geometry->parsed()) {
            const magbeam::Scenario s =
                load_with_overrides(scenario_path, mode_override, tol, seed, 0.0);
            if (!s.geometry)
                throw magbeam::SchemaError("geometry: scenario has no geometry block");
            const magbeam::SystemParams p = s.to_system_params();
            std::ostringstream os;
            os << "m_tx_rx_h:";
            for (int k = 0; k < p.m.size(); ++k) os << " " << p.m(k);
            os << "\nm_tx_tx_h:\n" << p.m_tx << "\n";
            write_or_print(out_path, os.str());
            return 0;
        }
        if (validate->parsed()) {
            const magbeam::Scenario s =
                load_with_overrides(scenario_path, mode_override, tol, seed, 0.0);
            std::cout << "ok: " << (s.name.empty() ? scenario_path : s.name) << " ("
                      << s.tx.size() << " TX)\n";
            return 0;
        }
    } catch (const magbeam::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
