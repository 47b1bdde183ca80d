#include "fixtures.hpp"

#include "willmore/bounds.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace willmore;
using namespace fixtures;

namespace {

BetaTable random_table(std::mt19937_64& rng, int max_genus)
{
    std::uniform_real_distribution<double> u(4 * kPi, 8 * kPi);
    auto t = BetaTable::empty();
    for (int g = 1; g <= max_genus; ++g) {
        double v = u(rng);
        if (v >= 8 * kPi) v = 4 * kPi;
        t.set(g, v, Provenance::numeric);
    }
    return t;
}

}  // namespace

TEST_CASE("Li-Yau bound")
{
    CHECK(li_yau_bound(1) == doctest::Approx(4 * kPi));
    CHECK(li_yau_bound(2) == doctest::Approx(8 * kPi));
    CHECK(li_yau_bound(3) == doctest::Approx(12 * kPi));
    CHECK_THROWS_AS(li_yau_bound(0), std::invalid_argument);
}

TEST_CASE("omega_g")
{
    const BetaTable betas;
    CHECK(std::isinf(omega_g(1, betas)));
    CHECK(omega_g(1, betas) > 0);
    CHECK(omega_g(2, betas) == doctest::Approx(4 * kPi * kPi - 4 * kPi).epsilon(1e-14));

    SUBCASE("synthetic genus-4 table")
    {
        auto t = BetaTable::empty();
        t.set(1, 13, Provenance::user);
        t.set(2, 14, Provenance::user);
        t.set(3, 15, Provenance::user);
        const double f = 4 * kPi;
        const double expect = std::min({f + 4 * (13 - f), f + 2 * (13 - f) + (14 - f), f + 2 * (14 - f), f + (13 - f) + (15 - f)});
        CHECK(omega_g(4, t) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(omega_g_brute_force(4, t) == omega_g(4, t));
    }
    SUBCASE("missing entry")
    {
        CHECK_THROWS_AS(omega_g(3, betas), std::out_of_range);
    }
    SUBCASE("dynamic programme equals enumeration")
    {
        std::mt19937_64 rng(2024);
        for (int trial = 0; trial < 100; ++trial) {
            const auto t = random_table(rng, 8);
            for (int g = 1; g <= 8; ++g) CHECK(omega_g(g, t) == omega_g_brute_force(g, t));
        }
    }
    SUBCASE("monotone in the table")
    {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            auto t = random_table(rng, 6);
            auto raised = t;
            for (const auto& [g, e] : t.entries()) raised.set(g, std::min(e.value + 0.3, 8 * kPi - 1e-9), Provenance::numeric);
            for (int g = 2; g <= 6; ++g) CHECK(omega_g(g, raised) >= omega_g(g, t));
        }
    }
}

TEST_CASE("beta table")
{
    const BetaTable t;
    CHECK(t.at(1) == doctest::Approx(2 * kPi * kPi));
    CHECK(t.entry(1).provenance == Provenance::exact);
    auto u = t;
    CHECK_THROWS_AS(u.set(2, 8 * kPi, Provenance::user), std::invalid_argument);
    CHECK_THROWS_AS(u.set(2, 3.0, Provenance::user), std::invalid_argument);
    CHECK_THROWS_AS(u.set(0, 20.0, Provenance::user), std::invalid_argument);
    u.set(2, 21.5, Provenance::numeric);
    const auto back = BetaTable::from_csv(u.to_csv());
    CHECK(back.at(2) == 21.5);
    CHECK(back.at(1) == t.at(1));
    CHECK(back.entry(2).provenance == Provenance::numeric);
    CHECK(BetaTable::from_csv("genus,beta\n1,19.7392\n").entry(1).provenance == Provenance::user);
    CHECK_THROWS(BetaTable::from_csv("1,abc\n"));
    CHECK_THROWS(BetaTable::from_csv("1.5,20\n"));
}

TEST_CASE("Schygulla curve")
{
    const double r0 = 36 * kPi;
    SUBCASE("rejects out-of-range samples")
    {
        CHECK_THROWS_AS(SchygullaCurve({{40 * kPi, 8 * kPi}}), std::invalid_argument);
        CHECK_THROWS_AS(SchygullaCurve({{40 * kPi, 4 * kPi * 0.97}}), std::invalid_argument);
        CHECK_THROWS_AS(SchygullaCurve({{30 * kPi, 13.0}}), std::invalid_argument);
        CHECK_THROWS_AS(SchygullaCurve({{40 * kPi, 13.0}, {40 * kPi, 14.0}}), std::invalid_argument);
        CHECK_NOTHROW(SchygullaCurve({{40 * kPi, 4 * kPi * 0.985}}));
    }
    SUBCASE("monotone cleanup and interpolation")
    {
        const SchygullaCurve c({{50 * kPi, 16.0}, {40 * kPi, 14.0}, {60 * kPi, 15.0}, {70 * kPi, 18.0}}, true);
        REQUIRE(c.samples().size() == 5);
        CHECK(c.samples().front().first == r0);
        CHECK(c.samples().front().second == doctest::Approx(4 * kPi));
        for (std::size_t i = 1; i < c.samples().size(); ++i) CHECK(c.samples()[i].second >= c.samples()[i - 1].second);
        CHECK(c.monotone_violations().size() == 2);
        CHECK(c.samples()[2].second == doctest::Approx(15.5));
        CHECK(c.samples()[3].second == doctest::Approx(15.5));
        CHECK(c(45 * kPi) == doctest::Approx(14.75));
        CHECK(c(40 * kPi) == doctest::Approx(14.0));
        CHECK_THROWS_AS(c(80 * kPi), std::out_of_range);
        CHECK_THROWS_AS(c(30 * kPi), std::out_of_range);
        const auto back = SchygullaCurve::from_csv(c.to_csv());
        CHECK(back.samples() == c.samples());
        CHECK(c.to_csv().find("# adjusted R=") != std::string::npos);
    }
}

TEST_CASE("I_g threshold")
{
    const SchygullaCurve curve({{45 * kPi, 15.0}, {72 * kPi, 20.0}}, true);
    const BetaTable betas;
    const auto at_sphere = ig_threshold(36 * kPi, 1, betas, curve);
    CHECK(std::isinf(at_sphere.omega));
    CHECK(at_sphere.threshold == doctest::Approx(2 * kPi * kPi));
    const auto t = ig_threshold(60 * kPi, 1, betas, curve);
    CHECK(t.threshold == doctest::Approx(std::min(8 * kPi, 2 * kPi * kPi + curve(60 * kPi) - 4 * kPi)));
    CHECK(t.threshold <= 8 * kPi);
    CHECK_THROWS_AS(ig_threshold(35 * kPi, 1, betas, curve), std::invalid_argument);
    CHECK_THROWS_AS(ig_threshold(80 * kPi, 1, betas, curve), std::out_of_range);

    SUBCASE("genus two uses all three branches")
    {
        auto b2 = betas;
        b2.set(2, 21.0, Provenance::user);
        const auto g2 = ig_threshold(50 * kPi, 2, b2, curve);
        CHECK(g2.omega == doctest::Approx(4 * kPi * kPi - 4 * kPi));
        CHECK(g2.threshold == doctest::Approx(std::min({8 * kPi, g2.omega, g2.sphere})));
        CHECK(g2.threshold <= 8 * kPi);
    }
    SUBCASE("monotone in beta and curve")
    {
        const SchygullaCurve higher({{45 * kPi, 15.5}, {72 * kPi, 20.5}}, true);
        auto b = betas;
        b.set(1, 2 * kPi * kPi + 0.2, Provenance::user);
        for (double r : {40.0, 50.0, 60.0, 70.0}) {
            const double base = ig_threshold(r * kPi, 1, betas, curve).threshold;
            CHECK(ig_threshold(r * kPi, 1, betas, higher).threshold >= base);
            CHECK(ig_threshold(r * kPi, 1, b, curve).threshold >= base);
        }
    }
}
