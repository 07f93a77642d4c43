#include "fixtures.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <random>

using namespace invscat;

TEST_CASE("zero field") {
    ZeroField z(3);
    const Vec x = fixture::vec({0.3, -1.0, 2.0});
    CHECK(z.potential(x) == 0.0);
    CHECK(eval_force(z, x, x).norm() == 0.0);
    CHECK(check_closedness(z, point_cloud(3, {}), 1e-3).max_residual == 0.0);
}

TEST_CASE("shifted power bounds are exact") {
    ShiftedPowerProfile p(-2.5, 3.0, 1.0);
    const auto b = p.bounds();
    CHECK(b.beta0 == 2.5);
    CHECK(b.beta1 == 7.5);
    CHECK(b.alpha == 3.0);
    CHECK(p.W(1.0) == doctest::Approx(-2.5 / 8.0));
}

TEST_CASE("force matches central differences at second order") {
    for (int n : {2, 3}) {
        AlgebraicProfile prof(1.5, 2.5, 0.0);
        RadialPotentialField f(n, std::make_shared<AlgebraicProfile>(prof), 0.1, 0.1);
        Vec x = Vec::Constant(n, 0.7);
        x(0) = -0.4;
        auto fd = [&](double h) {
            Vec g(n);
            for (int i = 0; i < n; ++i) {
                Vec e = Vec::Zero(n);
                e(i) = h;
                g(i) = -(f.potential(x + e) - f.potential(x - e)) / (2 * h);
            }
            return (g - eval_force(f, x, Vec::Zero(n))).norm();
        };
        const double e1 = fd(1e-3), e2 = fd(5e-4);
        CHECK(e1 < 1e-6);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    }
}

TEST_CASE("radial model depends on |x| only beyond its radius") {
    auto f = fixture::field(3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    for (int k = 0; k < 20; ++k) {
        Vec x(3);
        x << N(rng), N(rng), N(rng);
        x *= (1.2 + k) / x.norm();
        const Eigen::Matrix3d Q = Eigen::Quaterniond(N(rng), N(rng), N(rng), N(rng)).normalized().toRotationMatrix();
        const Vec y = Q * x;
        CHECK(std::abs(f->potential(x) - f->potential(y)) < 1e-15);
        CHECK(f->potential(x) == doctest::Approx(std::pow(1 + x.norm(), -2.0)).epsilon(1e-14));
    }
}

TEST_CASE("bundled models satisfy their bounds on the point cloud") {
    const auto cloud2 = point_cloud(2, {});
    const auto cloud3 = point_cloud(3, {});
    CHECK(cloud2.size() >= 1000);
    CHECK(audit_bounds(*fixture::field(2), cloud2).passed());
    CHECK(audit_bounds(*fixture::field(3), cloud3).passed());
    RadialPotentialField alg(3, std::make_shared<AlgebraicProfile>(1.0, 2.0, 0.0), 0.1, 0.1);
    CHECK(audit_bounds(alg, cloud3).passed());
    MagneticBumpField mag(fixture::field(3), 0.8, 1.5);
    const auto a = audit_bounds(mag, cloud3);
    CHECK(a.passed());
    CHECK(a.max_antisymmetry_defect <= 1e-14);
}

TEST_CASE("magnetic bump vanishes outside its cutoff and is closed") {
    MagneticBumpField mag(fixture::field(3), 0.8, 1.5);
    CHECK(mag.radial_radius().value() == 1.5);
    CHECK(mag.magnetic(fixture::vec({1.0, 1.0, 0.5})).norm() == 0.0);
    CHECK(mag.magnetic(fixture::vec({0.3, 0.2, 0.1})).norm() > 0.0);
    std::vector<Vec> pts;
    for (const Vec& p : point_cloud(3, {})) if (p.norm() < 1.4) pts.push_back(p);
    const double r1 = check_closedness(mag, pts, 1e-3).max_residual;
    const double r2 = check_closedness(mag, pts, 5e-4).max_residual;
    CHECK(r1 < 1e-5);
    CHECK((r2 < 1e-12 || r1 / r2 > 3.0));
}

TEST_CASE("closedness is automatic in the plane") {
    MagneticBumpField mag(fixture::field(2), 0.8, 1.5);
    CHECK(check_closedness(mag, point_cloud(2, {}), 1e-3).max_residual < 1e-12);
}

TEST_CASE("doubling the sample density never lowers the norm") {
    MagneticBumpField mag(fixture::field(3), 0.8, 1.5);
    SampleSpec s;
    s.radial_intervals = 7;
    s.directions = 16;
    const double a = shortrange_norm(mag, s);
    const double b = shortrange_norm(mag, s.doubled());
    CHECK(b >= a);
}

TEST_CASE("declared bounds are validated") {
    auto f = std::make_shared<RadialPotentialField>(2, fixture::profile(), 0.5, 1.0);
    ShortRangeBounds bad;
    bad.alpha = 0.5;
    CHECK_THROWS_AS(std::const_pointer_cast<RadialPotentialField>(f)->declare_bounds(bad), ValidationError);
}
