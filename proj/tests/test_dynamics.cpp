#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace invscat;

TEST_CASE("energy contexts") {
    CHECK(fixture::nonrel().speed_at_infinity() == doctest::Approx(std::sqrt(20.0)));
    const auto r = fixture::rel();
    CHECK(r.speed_at_infinity() == doctest::Approx(10.0 * std::sqrt(1.0 - 1e4 / (110.0 * 110.0))));
    CHECK(r.speed_at_infinity() < r.c);
    CHECK_THROWS_AS(EnergyContext::nonrelativistic(-1.0).validate(), ValidationError);
    CHECK_THROWS_AS(EnergyContext::relativistic(99.0, 10.0).validate(), ValidationError);
    const Vec v = fixture::vec({3.0, -4.0});
    CHECK((r.velocity(r.momentum(v)) - v).norm() < 1e-13);
}

TEST_CASE("nontrapping constants for unit bounds") {
    ShortRangeBounds b;
    b.alpha = 2.0;
    b.beta = {1.0, 1.0, 1.0};
    const auto k = nontrapping_constants(fixture::nonrel(), b, 2);
    CHECK(k.C_E == doctest::Approx(oracle::CE_unit_bounds).epsilon(1e-14));
    CHECK(k.R_E == doctest::Approx(oracle::RE_unit_bounds).epsilon(1e-14));
    // rounded values as commonly quoted
    CHECK(std::abs(k.C_E - 0.87871) < 1e-4);
    CHECK(std::abs(k.R_E - 0.50874) < 1e-4);
    CHECK(std::pow(1.0 + k.R_E, -2.0) == doctest::Approx(k.C_E / 2));
}

TEST_CASE("E1 is where R_E reaches R") {
    const auto& b = fixture::field()->bounds();
    const auto E1 = energy_threshold_E1(Regime::nonrelativistic, 0.0, b, 2, 1.0);
    REQUIRE(E1);
    CHECK(nontrapping_constants(EnergyContext::nonrelativistic(*E1), b, 2).R_E == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nontrapping_constants(EnergyContext::nonrelativistic(*E1 * 0.99), b, 2).R_E > 1.0);
    // saturated relativistic constant: no energy works at c = 10, R = 1
    CHECK_FALSE(energy_threshold_E1(Regime::relativistic, 10.0, b, 2, 1.0));
}

TEST_CASE("free field: the scattering map is the identity") {
    for (int n : {2, 3}) {
        ZeroField z(n);
        for (const auto& ctx : {fixture::nonrel(), fixture::rel()}) {
            Vec v = Vec::Zero(n), x = Vec::Zero(n);
            v(1) = ctx.speed_at_infinity();
            x(0) = 0.7;
            const auto run = scattering_map(z, ctx, v, x);
            CHECK((run.asymptotes.v_plus - v).norm() <= 1e-9);
            CHECK((run.asymptotes.x_plus - x).norm() <= 1e-8);
        }
    }
}

TEST_CASE("energy is conserved along scattering runs") {
    auto f = fixture::field();
    for (const auto& ctx : {fixture::nonrel(), fixture::rel()}) {
        for (double q : {4.7, 8.0, 20.0}) {
            const double sp = ctx.speed_at_infinity();
            const auto run = scattering_map(*f, ctx, fixture::vec({0.0, sp}), fixture::vec({q / sp, 0.0}));
            CHECK(run.trajectory.max_energy_drift() <= 1e-9);
            CHECK_FALSE(run.trajectory.drift_flagged());
            CHECK(std::abs(run.asymptotes.v_plus.norm() - sp) < 1e-9 * sp);
        }
    }
}

TEST_CASE("magnetic field does no work") {
    auto mag = std::make_shared<MagneticBumpField>(fixture::field(2), 0.8, 1.5);
    const auto ctx = EnergyContext::nonrelativistic(20.0);
    const double sp = ctx.speed_at_infinity();
    const auto run = scattering_map(*mag, ctx, fixture::vec({0.0, sp}), fixture::vec({0.3, 0.0}));
    CHECK(run.trajectory.max_energy_drift() <= 1e-9);
}

TEST_CASE("escape estimate holds after the outward crossing") {
    auto f = fixture::field();
    const auto ctx = fixture::nonrel();
    const double sp = ctx.speed_at_infinity();
    const auto run = scattering_map(*f, ctx, fixture::vec({0.0, sp}), fixture::vec({0.2, 0.0}));
    const auto chk = check_escape(*f, run.trajectory, run.nontrapping);
    CHECK(chk.samples > 0);
    CHECK(chk.worst_ratio >= 1.0 - 1e-6);
    CHECK(chk.min_I_ddot > 0.0);
}

TEST_CASE("integrate rejects a state off the energy shell") {
    auto f = fixture::field();
    CHECK_THROWS_AS(integrate(*f, fixture::nonrel(), fixture::vec({5.0, 0.0}), fixture::vec({0.0, 1.0}), 0.0, 1.0, 1e-10),
                    ValidationError);
}

TEST_CASE("shooting start time grows as the tail tolerance tightens") {
    const auto& b = fixture::field()->bounds();
    ShootOptions loose, tight;
    loose.tol = 1e-6;
    tight.tol = 1e-10;
    const double sp = fixture::nonrel().speed_at_infinity();
    CHECK(shooting_start_time(fixture::nonrel(), b, 2, sp, 1.0, tight) >
          shooting_start_time(fixture::nonrel(), b, 2, sp, 1.0, loose));
    ShootOptions capped;
    capped.tol = 1e-30;
    capped.t0_cap = 10.0;
    CHECK_THROWS_AS(shooting_start_time(fixture::nonrel(), b, 2, sp, 1.0, capped), NumericalError);
}
