#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "layerflow/coefficients.hpp"
#include "layerflow/grid.hpp"
#include "layerflow/operators.hpp"

using namespace layerflow;

TEST_CASE("conductivity profiles") {
    auto canonical = make_conductivity(ProfileKind::canonical);
    CHECK(canonical(0.05, 0.1) == Catch::Approx(0.5));
    CHECK(canonical(0.3, 0.1) == 1.0);

    auto power = make_conductivity(ProfileKind::power, 3.0, 1.0);
    CHECK(power(0.1, 0.1) == Catch::Approx(0.01));

    auto cubic = make_conductivity(ProfileKind::degenerate_cubic);
    // max over [eps, 2eps] is attained at 2eps: 8 eps^2 (degeneracy trigger)
    CHECK(cubic(0.1, 0.05) == Catch::Approx(8.0 * 0.05 * 0.05));
    CHECK(cubic(0.9, 0.05) == 1.0);

    ConductivityProfile tab;
    tab.kind = ProfileKind::tabulated;
    tab.table = {{0.0, 0.0}, {0.1, 0.5}, {0.2, 1.0}};
    CHECK(tab(0.05, 0.1) == Catch::Approx(0.25));
    CHECK_THROWS_AS(tab(0.3, 0.1), std::out_of_range);

    CHECK_THROWS(make_conductivity(ProfileKind::power, -1.0, 1.0));
}

TEST_CASE("conductivity stays in [0,1]") {
    for (auto kind : {ProfileKind::unit, ProfileKind::canonical,
                      ProfileKind::power, ProfileKind::degenerate_cubic}) {
        auto a = make_conductivity(kind, 1.5, 0.5);
        for (double d = 0.0; d <= 0.5; d += 0.01) {
            double v = a(d, 0.1);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("capacity families and kappa classification") {
    auto b1 = capacity_from_kappa(1.0);
    CHECK(b1(0.05, 0.1) == Catch::Approx(10.0));
    CHECK(b1(0.5, 0.1) == 1.0);
    CHECK(kappa_limit(capacity_from_kappa(2.0)) == 2.0);

    auto bp = capacity_power(2.0);
    CHECK(bp(0.01, 0.1) == Catch::Approx(100.0));
    CHECK(std::isinf(kappa_limit(bp)));
    CHECK(kappa_limit(capacity_power(0.5)) == 0.0);
    CHECK(kappa_limit(capacity_power(1.0)) == 1.0);

    // capacity >= 1 everywhere for every admissible family
    for (double eps : {0.2, 0.1, 0.05})
        for (double d = 0.0; d <= 0.5; d += 0.01) {
            CHECK(b1(d, eps) >= 1.0);
            CHECK(bp(d, eps) >= 1.0);
        }
}

TEST_CASE("total capacity") {
    Grid g = build_grid(1, 40);
    LayerSpec l1 = layer_partition(g, 0.1);
    CHECK(total_capacity(g, l1, capacity_from_kappa(1.0)) ==
          Catch::Approx(2.8).epsilon(1e-12));

    LayerSpec l2 = layer_partition(g, 0.2);
    CHECK(total_capacity(g, l2, capacity_from_kappa(1.0)) ==
          Catch::Approx(2.6).epsilon(1e-12));

    CapacityProfile unit{[](double) { return 1.0; }, 0.0};
    CHECK(total_capacity(g, l1, unit) == Catch::Approx(1.0));
}

TEST_CASE("nondegeneracy integral, canonical profile") {
    auto a = make_conductivity(ProfileKind::canonical);
    for (double eps : {0.2, 0.1, 0.05})
        CHECK(nondegeneracy_integral(a, eps, 1.0) ==
              Catch::Approx(eps).margin(1e-8));
    CHECK(nondegeneracy_integral(a, 0.1, 0.5) ==
          Catch::Approx(std::sqrt(0.1 * std::numbers::pi) / 2.0).margin(1e-8));
}

TEST_CASE("nondegeneracy verdict for the power family") {
    // alpha >= 1/p + 1 rules the profile out regardless of beta
    CHECK_FALSE(power_profile_nondegenerate(3.0, 1.0, 1.0));
    CHECK(power_profile_nondegenerate(1.0, 1.0, 1.0));

    // value decreases toward 0 under eps -> eps/2 iff the verdict holds
    for (double alpha : {1.0, 1.5, 2.5})
        for (double beta : {0.5, 1.0})
            for (double p : {0.5, 1.0}) {
                auto a = make_conductivity(ProfileKind::power, alpha, beta);
                bool verdict = power_profile_nondegenerate(alpha, beta, p);
                double v1 = nondegeneracy_integral(a, 0.04, p);
                double v2 = nondegeneracy_integral(a, 0.02, p);
                INFO("alpha " << alpha << " beta " << beta << " p " << p
                              << " values " << v1 << " " << v2);
                if (verdict)
                    CHECK(v2 < v1);
                else
                    CHECK(v2 >= v1 * 0.999);
            }
}

TEST_CASE("nondegeneracy diverges for the cubic profile") {
    auto cubic = make_conductivity(ProfileKind::degenerate_cubic);
    CHECK(std::isinf(nondegeneracy_integral(cubic, 0.1, 1.0)));
    CHECK_FALSE(nondegeneracy_report(cubic, 0.1, 1.0).verdict_analytic);
}
