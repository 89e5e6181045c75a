// layerflow CLI: run scenario presets or config files, list presets, run
// the structural-identity suite, or emit the oracle table.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "layerflow/diagnostics.hpp"
#include "layerflow/experiments.hpp"
#include "layerflow/oracles.hpp"

namespace lf = layerflow;

static int cmd_run(const std::string& preset_name,
                   const std::string& config_path, const std::string& out) {
    lf::Scenario s;
    if (!preset_name.empty() && !config_path.empty()) {
        std::cerr << "run: give either --preset or --config, not both\n";
        return 1;
    }
    try {
        if (!preset_name.empty()) {
            s = lf::preset(preset_name);
        } else if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "run: cannot read config '" << config_path << "'\n";
                return 1;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            s = lf::parse_config(buf.str());
        } else {
            std::cerr << "run: need --preset <name> or --config <file>\n";
            return 1;
        }
        if (!out.empty()) s.output_path = out;
    } catch (const lf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::vector<lf::ReportRow> rows = lf::run_scenario(s);
        if (s.output_path.empty())
            lf::write_csv(rows, std::cout);
        else
            std::cerr << "layerflow: wrote " << rows.size() << " rows to "
                      << s.output_path << "\n";
        return 0;
    } catch (const lf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

// Quick structural-identity suite: oracle gate, per-step energy-dissipation
// balance, Reilly residual, trace/average gap bound.
static int cmd_check() {
    bool ok = true;
    auto report = [&](const std::string& name, bool pass,
                      const std::string& detail) {
        std::cout << (pass ? "PASS " : "FAIL ") << name << " (" << detail
                  << ")\n";
        ok = ok && pass;
    };

    auto oracle_results = lf::oracles::run_all();
    double worst = lf::oracles::worst_discrepancy(oracle_results);
    report("oracle-gate", worst <= 1e-8,
           "worst discrepancy " + lf::format_value(worst));

    lf::Grid g = lf::build_grid(1, 200);
    lf::LayerSpec layer = lf::layer_partition(g, 0.1);
    lf::OperatorPair op = lf::assemble_operators(
        g, layer, lf::make_conductivity(lf::ProfileKind::canonical),
        lf::capacity_from_kappa(1.0));
    lf::Field u0 = lf::sample_field(
        g, [](double x, double) { return std::cos(std::numbers::pi * x); });
    lf::RunLedger led = lf::run_boundary_layer(op, u0, 1e-3, 0.1);
    double edb = lf::edb_ledger_check(led);
    report("energy-dissipation-balance", edb <= 1e-9,
           "max residual " + lf::format_value(edb));

    lf::Grid gr = lf::build_grid(1, 256);
    lf::LayerSpec lr = lf::layer_partition(gr, 0.25);
    lf::Field ur = lf::sample_field(gr, [](double x, double) { return x * x; });
    lf::ReillyReport rr = lf::reilly_residual(
        ur, gr, lr, lf::make_conductivity(lf::ProfileKind::canonical));
    report("reilly-identity", rr.residual <= 2e-2,
           "residual " + lf::format_value(rr.residual));

    double nd = lf::nondegeneracy_integral(
        lf::make_conductivity(lf::ProfileKind::canonical), 0.1, 1.0);
    lf::GapReport gap = lf::trace_average_gap(
        led.final_field, op, led.steps.back().energy, nd);
    report("trace-average-gap", gap.gap <= gap.bound + 1e-14,
           "gap " + lf::format_value(gap.gap) + " bound " +
               lf::format_value(gap.bound));

    return ok ? 0 : 2;
}

static int cmd_oracle() {
    auto results = lf::oracles::run_all();
    std::cout << "name,claimed,value,abs_error,rel_error,method\n";
    for (const auto& r : results)
        std::cout << r.name << ',' << lf::format_value(r.claimed) << ','
                  << lf::format_value(r.value) << ','
                  << lf::format_value(r.abs_error) << ','
                  << lf::format_value(r.rel_error) << ",\"" << r.method
                  << "\"\n";
    return lf::oracles::worst_discrepancy(results) <= 1e-8 ? 0 : 2;
}

int main(int argc, char** argv) {
    CLI::App app{"boundary-layer heat equation laboratory"};
    app.require_subcommand(1);

    std::string preset_name, config_path, out_path;
    CLI::App* run = app.add_subcommand("run", "run a preset or config scenario");
    run->add_option("--preset", preset_name, "preset name");
    run->add_option("--config", config_path, "config file path");
    run->add_option("--out", out_path, "CSV output path");

    CLI::App* list = app.add_subcommand("list-presets", "list scenario presets");
    CLI::App* check = app.add_subcommand("check", "run the identity suite");
    CLI::App* oracle = app.add_subcommand("oracle", "emit the oracle table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run->parsed()) return cmd_run(preset_name, config_path, out_path);
    if (list->parsed()) {
        for (const auto& p : lf::preset_names()) std::cout << p << "\n";
        return 0;
    }
    if (check->parsed()) return cmd_check();
    if (oracle->parsed()) return cmd_oracle();
    return 1;
}
