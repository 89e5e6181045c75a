#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "layerflow/diagnostics.hpp"

using namespace layerflow;

namespace {

OperatorPair canonical_pair(const Grid& g, double eps, double kappa = 1.0) {
    return assemble_operators(g, layer_partition(g, eps),
                              make_conductivity(ProfileKind::canonical),
                              capacity_from_kappa(kappa));
}

} // namespace

TEST_CASE("reilly identity for u = x^2 at eps = 1/4") {
    auto a = make_conductivity(ProfileKind::canonical);
    double prev = 1e9;
    for (int M : {128, 256, 512}) {
        Grid g = build_grid(1, M);
        LayerSpec layer = layer_partition(g, 0.25);
        Field u = sample_field(g, [](double x, double) { return x * x; });
        ReillyReport rep = reilly_residual(u, g, layer, a);
        INFO("M " << M << " lhs " << rep.lhs << " hess " << rep.hessian_term
                  << " bdry " << rep.boundary_term);
        CHECK(rep.lhs == Catch::Approx(38.0 / 3.0).epsilon(0.05));
        CHECK(rep.hessian_term == Catch::Approx(8.0 / 3.0).epsilon(0.05));
        CHECK(rep.boundary_term == Catch::Approx(10.0).epsilon(0.02));
        CHECK(rep.residual < prev);
        prev = rep.residual;
    }
}

TEST_CASE("reilly identity for the linear field") {
    // lhs = int |a'|^2 = 2/eps = boundary term; hessian vanishes
    Grid g = build_grid(1, 256);
    LayerSpec layer = layer_partition(g, 0.25);
    Field u = sample_field(g, [](double x, double) { return x; });
    ReillyReport rep =
        reilly_residual(u, g, layer, make_conductivity(ProfileKind::canonical));
    CHECK(rep.lhs == Catch::Approx(8.0).epsilon(0.02));
    CHECK(rep.hessian_term == Catch::Approx(0.0).margin(1e-18));
    CHECK(rep.boundary_term == Catch::Approx(8.0).margin(1e-10));
}

TEST_CASE("reilly report on a constant field is identically zero") {
    Grid g = build_grid(1, 64);
    LayerSpec layer = layer_partition(g, 0.25);
    Field u = sample_field(g, [](double, double) { return 7.0; });
    ReillyReport rep =
        reilly_residual(u, g, layer, make_conductivity(ProfileKind::canonical));
    CHECK(rep.lhs == 0.0);
    CHECK(rep.hessian_term == 0.0);
    CHECK(rep.boundary_term == 0.0);
    CHECK(rep.residual == 0.0);
}

TEST_CASE("reilly rejects non-canonical profiles") {
    Grid g = build_grid(1, 64);
    LayerSpec layer = layer_partition(g, 0.25);
    Field u = sample_field(g, [](double x, double) { return x; });
    CHECK_THROWS(reilly_residual(
        u, g, layer, make_conductivity(ProfileKind::degenerate_cubic)));
}

TEST_CASE("reilly residual shrinks in 2D including a mixed-derivative field") {
    auto a = make_conductivity(ProfileKind::canonical);
    const double pi = std::numbers::pi;
    double prev = 1e9;
    // coarser tangential grid keeps the O(h) kink defect dominant, so the
    // decrease is monotone from the first refinement
    for (int M : {32, 64, 128}) {
        Grid g = build_grid(2, M, M / 4);
        LayerSpec layer = layer_partition(g, 0.25);
        Field u = sample_field(g, [&](double x, double y) {
            return x * x * std::cos(2.0 * pi * y); // u_{x'N} != 0
        });
        ReillyReport rep = reilly_residual(u, g, layer, a);
        INFO("M " << M << " residual " << rep.residual);
        CHECK(rep.residual < prev);
        prev = rep.residual;
    }
}

TEST_CASE("energy equality residual is first order in dt") {
    Grid g = build_grid(1, 100);
    OperatorPair op = canonical_pair(g, 0.1);
    Field u = sample_field(g, [](double x, double) {
        return std::cos(std::numbers::pi * x);
    });
    double r1 = energy_equality_check(run_boundary_layer(op, u, 2e-3, 0.1));
    double r2 = energy_equality_check(run_boundary_layer(op, u, 1e-3, 0.1));
    double factor = r1 / r2;
    CHECK(factor > 1.7);
    CHECK(factor < 2.3);
}

TEST_CASE("edb check on constant runs is zero") {
    Grid g = build_grid(1, 64);
    OperatorPair op = canonical_pair(g, 0.125);
    Field c = sample_field(g, [](double, double) { return 1.0; });
    CHECK(edb_ledger_check(run_boundary_layer(op, c, 1e-3, 0.01)) < 1e-15);
}

TEST_CASE("trace/average gap obeys the non-degeneracy bound") {
    Grid g = build_grid(1, 400);
    auto a = make_conductivity(ProfileKind::canonical);
    double nd01 = nondegeneracy_integral(a, 0.1, 1.0);

    SECTION("closed-form linear example") {
        OperatorPair op = canonical_pair(g, 0.1);
        Field lin = sample_field(g, [](double x, double) { return x; });
        GapReport rep =
            trace_average_gap(lin, op, op.energy(lin.values), nd01);
        CHECK(rep.gap == Catch::Approx(0.005).margin(1e-12));
        CHECK(rep.bound == Catch::Approx(0.09).margin(1e-8));
        CHECK(rep.gap <= rep.bound);
    }
    SECTION("seeded random smooth fields") {
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> coeff(-1.0, 1.0);
        for (double eps : {0.2, 0.1, 0.05}) {
            OperatorPair op = canonical_pair(g, eps);
            double nd = nondegeneracy_integral(a, eps, 1.0);
            for (int trial = 0; trial < 30; ++trial) {
                std::vector<double> c(7);
                for (double& v : c) v = coeff(rng);
                Field u = sample_field(g, [&](double x, double) {
                    double s = 0.0;
                    for (size_t m = 0; m < c.size(); ++m)
                        s += c[m] * std::cos(m * std::numbers::pi * x);
                    return s;
                });
                GapReport rep =
                    trace_average_gap(u, op, op.energy(u.values), nd);
                CHECK(rep.gap <= rep.bound + 1e-12);
            }
        }
    }
}

TEST_CASE("bulk comparison of identical ledgers is zero") {
    Grid g = build_grid(1, 100);
    OperatorPair op = canonical_pair(g, 0.1);
    Field u = sample_field(g, [](double x, double) {
        return std::cos(std::numbers::pi * x);
    });
    RunLedger led = run_boundary_layer(op, u, 1e-3, 0.02, {0.01, 0.02});
    ErrorReport rep = compare_to_limit(op, led, led);
    CHECK(rep.l2_interior == 0.0);
    CHECK(rep.l2_boundary == 0.0);
    CHECK(rep.sup_t_l2 == 0.0);
}

TEST_CASE("weighted boundary flux vanishes with the natural closure") {
    // near equilibrium the discrete flux a_{1/2}(u_1 - u_0)/h dies out
    Grid g = build_grid(1, 100);
    OperatorPair op = canonical_pair(g, 0.1);
    Field u = sample_field(g, [](double x, double) {
        return std::cos(std::numbers::pi * x);
    });
    RunLedger led = run_boundary_layer(op, u, 2e-3, 10.0);
    const Field& f = led.final_field;
    double flux = op.face_conductivity[0] * (f[1] - f[0]) / g.h();
    CHECK(std::abs(flux) < 1e-7);
}

TEST_CASE("rate estimation") {
    std::vector<double> p = {0.1, 0.05, 0.025};
    CHECK(rate_estimate(p, p) == Catch::Approx(1.0).margin(1e-12));
    std::vector<double> sq = {0.01, 0.0025, 0.000625};
    CHECK(rate_estimate(p, sq) == Catch::Approx(2.0).margin(1e-12));
    std::vector<double> c = {3.0, 3.0, 3.0};
    CHECK(rate_estimate(p, c) == Catch::Approx(0.0).margin(1e-12));
    CHECK_THROWS(rate_estimate({0.1, 0.2}, {1.0, 2.0}));
}
