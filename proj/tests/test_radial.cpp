#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace invscat;

namespace {
RadialScatteringContext nr() { return make_radial_context(fixture::nonrel(), fixture::profile()); }
RadialScatteringContext rl() { return make_radial_context(fixture::rel(), fixture::profile()); }
}  // namespace

TEST_CASE("beta and beta' against the oracle") {
    CHECK(nr().beta == doctest::Approx(oracle::nonrel_beta).epsilon(1e-14));
    CHECK(nr().beta_prime == doctest::Approx(oracle::nonrel_beta_prime).epsilon(1e-14));
    CHECK(rl().beta == doctest::Approx(oracle::rel_beta).epsilon(1e-14));
    CHECK(rl().beta_prime == doctest::Approx(oracle::rel_beta_prime).epsilon(1e-14));
}

TEST_CASE("r_min against the oracle, with its identity and bounds") {
    const auto a = nr(), b = rl();
    CHECK(r_min(a, 5.0) == doctest::Approx(oracle::nonrel_rmin_q5).epsilon(1e-13));
    CHECK(r_min(a, a.beta) == doctest::Approx(oracle::nonrel_rmin_beta).epsilon(1e-13));
    CHECK(r_min(b, 5.0) == doctest::Approx(oracle::rel_rmin_q5).epsilon(1e-13));
    for (const auto& rc : {a, b}) {
        double prev = 0.0;
        for (int k = 0; k < 30; ++k) {
            const double q = rc.beta * std::pow(100.0, k / 29.0);
            const double r = r_min(rc, q);
            const double scale = rc.ctx.relativistic_regime() ? rc.ctx.E * rc.ctx.E : rc.ctx.E;
            CHECK(std::abs(perihelion_function(rc, q, r)) <= 1e-12 * scale);
            const auto pb = r_min_bounds(rc, q);
            CHECK(pb.lower < r);
            CHECK(r < pb.upper);
            CHECK(r > prev);
            prev = r;
        }
        CHECK(r_min(rc, rc.beta) <= rc.beta_prime);
    }
}

TEST_CASE("r_min derivative matches central differences at second order") {
    for (const auto& rc : {nr(), rl()}) {
        const double q = 2.0 * rc.beta;
        const double d = r_min_derivative(rc, q);
        auto err = [&](double h) { return std::abs((r_min(rc, q + h) - r_min(rc, q - h)) / (2 * h) - d); };
        const double e1 = err(1e-2), e2 = err(5e-3);
        CHECK(e1 < 1e-5);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("deflection by quadrature against the oracle") {
    CHECK(deflection_quadrature(nr(), 5.0) == doctest::Approx(oracle::nonrel_g_q5).epsilon(1e-11));
    CHECK(deflection_quadrature(nr(), 10.0) == doctest::Approx(oracle::nonrel_g_q10).epsilon(1e-11));
    CHECK(deflection_quadrature(nr(), nr().beta) == doctest::Approx(oracle::nonrel_g_beta).epsilon(1e-11));
    CHECK(deflection_quadrature(rl(), 5.0) == doctest::Approx(oracle::rel_g_q5).epsilon(1e-11));
    CHECK(deflection_quadrature(rl(), rl().beta) == doctest::Approx(oracle::rel_g_beta).epsilon(1e-11));
}

TEST_CASE("free deflection has the closed form") {
    auto zero = std::make_shared<ZeroProfile>(1.0);
    const auto a = make_radial_context(fixture::nonrel(), zero);
    const auto b = make_radial_context(fixture::rel(), zero);
    for (double q : {a.beta, 7.0, 40.0, 400.0}) {
        CHECK(std::abs(deflection_quadrature(a, q) - M_PI / q) <= 1e-10 * M_PI / q);
        const double gb = M_PI / (b.ctx.E * q);
        CHECK(std::abs(deflection_quadrature(b, q) - gb) <= 1e-10 * gb);
    }
}

TEST_CASE("deflection from orbits matches quadrature") {
    auto f = fixture::field();
    for (const auto& rc : {nr(), rl()}) {
        for (double m : {1.0, 2.5, 9.0}) {
            const double q = m * rc.beta;
            const auto res = deflection_ode(rc, *f, q);
            const double gq = deflection_quadrature(rc, q);
            CHECK(std::abs(res.g - gq) / gq <= 1e-5);
            CHECK(res.angular_momentum_residual <= 1e-8);
            CHECK(res.radial_energy_residual <= 1e-7);
            CHECK(res.perihelion_asymmetry <= 1e-6);
        }
    }
}

TEST_CASE("deflection curve interpolation, tail and coverage") {
    const auto rc = nr();
    const auto curve = sample_deflection(rc, {24, 2.0});
    CHECK(curve.q_min() == doctest::Approx(rc.beta));
    CHECK(curve.q_max() == doctest::Approx(100 * rc.beta));
    for (double m : {1.3, 4.1, 33.0}) {
        const double q = m * rc.beta;
        CHECK(std::abs(curve.g(q) - deflection_quadrature(rc, q)) / curve.g(q) < 1e-6);
    }
    // the tail joins the table continuously
    const double qm = curve.q_max();
    CHECK(std::abs(curve.theta(qm * (1 + 1e-9)) - curve.theta(qm)) < 1e-8);
    CHECK(std::abs(curve.theta(1e6) - M_PI) < 1e-5);
    try {
        curve.require_coverage(1.0, 1e4);
        FAIL("coverage should be rejected");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("required range") != std::string::npos);
    }
    CHECK_THROWS_AS(DeflectionCurve({}, {1.0, 0.5}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(DeflectionCurve({}, {1.0, 2.0}, {1.0, -1.0}), ValidationError);
}

TEST_CASE("relativistic swept angle approaches the nonrelativistic one as c^-2") {
    const double g10 = nonrelativistic_limit_gap(rl(), 1.2, 10.0);
    const double g20 = nonrelativistic_limit_gap(make_radial_context(fixture::rel(20.0), fixture::profile()), 1.2, 10.0);
    CHECK(g10 / g20 == doctest::Approx(4.0).epsilon(0.2));
    CHECK_THROWS_AS(nonrelativistic_limit_gap(rl(), 0.5, 10.0), ValidationError);
}
