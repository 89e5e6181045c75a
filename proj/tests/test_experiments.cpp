#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "layerflow/experiments.hpp"

using namespace layerflow;

TEST_CASE("parse_config reads a minimal document") {
    std::string doc =
        "[grid]\n"
        "dim = 1\n"
        "cells = 200\n"
        "[coefficients]\n"
        "a = canonical\n"
        "kappa = 1\n"
        "[data]\n"
        "u0 = cosine:1\n"
        "[run]\n"
        "eps = 0.2, 0.1\n"
        "dt = 5e-4\n"
        "T = 0.1\n"
        "snapshots = 0.05, 0.1\n"
        "[output]\n"
        "path = out.csv\n";
    Scenario s = parse_config(doc);
    CHECK(s.dimension == 1);
    CHECK(s.cells_normal == 200);
    CHECK(s.eps_sweep == std::vector<double>{0.2, 0.1});
    CHECK(s.dt == Catch::Approx(5e-4));
    CHECK(s.horizon == Catch::Approx(0.1));
    CHECK(s.snapshot_times == std::vector<double>{0.05, 0.1});
    CHECK(s.output_path == "out.csv");
    CHECK(s.b.kappa == 1.0);
    REQUIRE(s.references.size() == 1);
    CHECK(s.references[0] == LimitKind::dynamic);
}

TEST_CASE("kappa extremes select the power capacity families") {
    std::string base = "[run]\neps = 0.1\n[coefficients]\n";
    Scenario s0 = parse_config(base + "kappa = 0\n");
    CHECK(s0.b.kappa == 0.0);
    CHECK(s0.b.phi(0.04) == Catch::Approx(1.0 / std::sqrt(0.04)));
    CHECK(s0.references[0] == LimitKind::neumann);

    Scenario si = parse_config(base + "kappa = inf\n");
    CHECK(std::isinf(si.b.kappa));
    CHECK(si.b.phi(0.1) == Catch::Approx(100.0));
    CHECK(si.references[0] == LimitKind::dirichlet);
}

TEST_CASE("parse_config rejects bad documents with line numbers") {
    auto fails_with = [](const std::string& doc, const std::string& needle) {
        try {
            parse_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    fails_with("[grid]\nwidth = 3\n[run]\neps = 0.1\n[coefficients]\nkappa=1\n",
               "line 2");
    fails_with("[grid]\nwidth = 3\n", "unknown key 'width'");
    fails_with("[bogus]\n", "unknown section");
    fails_with("[coefficients]\nkappa = 1\nphi = power:2\n[run]\neps = 0.1\n",
               "conflicting capacity spec");
    fails_with("[coefficients]\nphi = kappa_over_eps\n[run]\neps = 0.1\n",
               "requires kappa");
    fails_with("[coefficients]\nkappa = 1\n", "eps");
    fails_with("[run]\neps = 0.1\n", "kappa or phi");
    fails_with("[run]\neps = abc\n", "invalid number");
}

TEST_CASE("phi = kappa_over_eps is accepted alongside kappa") {
    Scenario s = parse_config(
        "[coefficients]\nkappa = 2\nphi = kappa_over_eps\n[run]\neps = 0.1\n");
    CHECK(s.b.kappa == 2.0);
    CHECK(s.b.phi(0.1) == Catch::Approx(20.0));
}

TEST_CASE("presets are all constructible; bad names list what exists") {
    for (const std::string& name : preset_names()) {
        Scenario s = preset(name);
        CHECK(s.name == name);
    }
    try {
        preset("nope");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("dynamic-k1") != std::string::npos);
        CHECK(msg.find("reilly") != std::string::npos);
    }
}

TEST_CASE("resolve_cells refines to align the sweep") {
    Scenario s;
    s.cells_normal = 10;
    s.eps_sweep = {0.15};
    std::ostringstream warn;
    CHECK(resolve_cells(s, &warn) == 40); // 0.15*20=3 cells < 4 minimum
    CHECK(warn.str().find("refining") != std::string::npos);

    s.cells_normal = 400;
    s.eps_sweep = {0.2, 0.1, 0.05, 0.025};
    CHECK(resolve_cells(s, nullptr) == 400);

    s.eps_sweep = {3e-4}; // needs > 13000 cells for 4 layer cells
    CHECK_THROWS_AS(resolve_cells(s, nullptr), ConfigError);
}

TEST_CASE("initial data recipes") {
    Grid g = build_grid(1, 100);
    Field c = make_initial_field(g, "constant:2.5");
    CHECK(c[37] == 2.5);

    Field lin = make_initial_field(g, "linear");
    CHECK(lin[g.node(50, 0)] == Catch::Approx(0.5));

    Field cosu = make_initial_field(g, "cosine:2");
    CHECK(cosu[g.node(0, 0)] == Catch::Approx(1.0));
    CHECK(cosu[g.node(50, 0)] == Catch::Approx(-1.0));

    Field bump = make_initial_field(g, "bump");
    CHECK(bump[g.node(10, 0)] == 0.0);   // x = 0.1, outside support
    CHECK(bump[g.node(50, 0)] == Catch::Approx(1.0)); // peak at x = 1/2
    CHECK(bump[g.node(90, 0)] == 0.0);

    Field mode = make_initial_field(g, "eigenmode:1:odd:1");
    CHECK(mode[g.node(50, 0)] == Catch::Approx(0.0).margin(1e-14));

    CHECK_THROWS_AS(make_initial_field(g, "sawtooth"), ConfigError);
    CHECK_THROWS_AS(make_initial_field(g, "cosine"), ConfigError);
}

TEST_CASE("boundary data recipes") {
    Grid g = build_grid(1, 100);
    Field u = make_initial_field(g, "linear");
    BoundaryValues tr = make_boundary_data(g, u, "trace");
    CHECK(tr.bottom[0] == 0.0);
    CHECK(tr.top[0] == 1.0);
    BoundaryValues cw = make_boundary_data(g, u, "constant:0.3");
    CHECK(cw.bottom[0] == 0.3);
    CHECK(cw.top[0] == 0.3);
    CHECK_THROWS_AS(make_boundary_data(g, u, "ramp"), ConfigError);
}

TEST_CASE("csv output is byte-deterministic") {
    std::vector<ReportRow> rows = {
        {"demo", 0.1, 0.01, 5e-4, 0.25, "energy_final", 1.0 / 3.0},
        {"demo", 0.0, 0.01, 5e-4, 0.25, "limit_dynamic_energy_final",
         std::numeric_limits<double>::infinity()}};
    std::ostringstream a, b;
    write_csv(rows, a);
    write_csv(rows, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("scenario,eps,h,dt,t,quantity,value\n") == 0);
    CHECK(a.str().find("0.333333333333") != std::string::npos);
    CHECK(a.str().find(",inf\n") != std::string::npos);
}

TEST_CASE("a constant-data scenario stays at equilibrium") {
    Scenario s;
    s.name = "still";
    s.cells_normal = 40;
    s.u0_recipe = "constant:1";
    s.eps_sweep = {0.2};
    s.dt = 1e-3;
    s.horizon = 0.01;
    s.snapshot_times = {0.01};
    s.workers = 1;

    std::vector<ReportRow> rows = run_scenario(s);
    REQUIRE_FALSE(rows.empty());
    for (const ReportRow& r : rows) {
        if (r.quantity == "l2_bulk_final_vs_dynamic" ||
            r.quantity == "sup_t_l2_bulk_vs_dynamic" ||
            r.quantity == "trace_path_vs_dynamic" ||
            r.quantity == "edb_max_residual" ||
            r.quantity == "energy_equality_residual" ||
            r.quantity == "energy_final" ||
            r.quantity == "dissipation_integral" ||
            r.quantity == "gap_sq")
            CHECK(std::abs(r.value) < 1e-12);
        if (r.quantity == "sup_t_trace_norm_sq")
            CHECK(r.value == Catch::Approx(2.0)); // both components at 1
    }
}

TEST_CASE("parallel and serial sweeps produce identical rows") {
    Scenario s;
    s.name = "par";
    s.cells_normal = 40;
    s.eps_sweep = {0.2, 0.1};
    s.dt = 2e-3;
    s.horizon = 0.02;
    s.snapshot_times = {0.02};

    Scenario serial = s;
    serial.workers = 1;
    Scenario parallel = s;
    parallel.workers = 2;

    std::ostringstream a, b;
    write_csv(run_scenario(serial), a);
    write_csv(run_scenario(parallel), b);
    CHECK(a.str() == b.str());
}
