#include "invscat/monotone_cubic.hpp"
#include "invscat/ode.hpp"
#include "invscat/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace invscat;

TEST_CASE("dopri5 integrates exponential decay with dense output") {
    ode::Options opt;
    opt.rtol = opt.atol = 1e-12;
    auto sol = ode::dopri5([](double, const Vec& y, Vec& d) { d = -y; }, 0.0, Vec::Ones(1), 5.0, opt);
    CHECK(sol.dense.t_end() == doctest::Approx(5.0));
    for (double t : {0.3, 1.7, 2.2, 4.9})
        CHECK(std::abs(sol.dense(t)(0) - std::exp(-t)) < 1e-10);
}

TEST_CASE("dopri5 keeps the oscillator energy") {
    ode::Options opt;
    opt.rtol = opt.atol = 1e-12;
    Vec y0(2);
    y0 << 1.0, 0.0;
    auto sol = ode::dopri5([](double, const Vec& y, Vec& d) { d.resize(2); d << y(1), -y(0); }, 0.0, y0, 50.0, opt);
    for (const Vec& y : sol.dense.states()) CHECK(std::abs(y.squaredNorm() - 1.0) < 1e-9);
}

TEST_CASE("step limit caps every step") {
    ode::Options opt;
    opt.step_limit = [](double, const Vec&) { return 0.05; };
    auto sol = ode::dopri5([](double, const Vec&, Vec& d) { d = Vec::Zero(1); }, 0.0, Vec::Ones(1), 3.0, opt);
    const auto& t = sol.dense.times();
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] - t[k - 1] <= 0.05 + 1e-15);
}

TEST_CASE("observer can stop the integration") {
    ode::Options opt;
    auto sol = ode::dopri5([](double, const Vec&, Vec& d) { d = Vec::Ones(1); }, 0.0, Vec::Zero(1), 10.0, opt,
                           [](double t, const Vec&, double&) { return t < 1.0; });
    CHECK(sol.stopped_by_observer);
    CHECK(sol.dense.t_end() < 10.0);
}

TEST_CASE("quadrature on finite and half-infinite ranges") {
    CHECK(quad::integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-14).value == doctest::Approx(1.0 / 3).epsilon(1e-14));
    const double v = quad::integrate_half_line([](double t) { return std::exp(-t); }, 1.0, 1e-13).value;
    CHECK(std::abs(v - 1.0) < 1e-12);
    const double p = quad::integrate_half_line([](double t) { return 1.0 / (1.0 + t * t); }, 1.0, 1e-13).value;
    CHECK(std::abs(p - M_PI / 2) < 1e-12);
}

TEST_CASE("monotone cubic is fourth order on smooth monotone data") {
    auto err = [](int m) {
        std::vector<double> x(m + 1), y(m + 1);
        for (int i = 0; i <= m; ++i) {
            x[i] = double(i) / m;
            y[i] = std::exp(x[i]);
        }
        MonotoneCubic f(x, y);
        double e = 0.0;
        for (int k = 0; k < 997; ++k) {
            const double t = k / 996.0;
            e = std::max(e, std::abs(f(t) - std::exp(t)));
        }
        return e;
    };
    const double ratio = err(20) / err(40);
    CHECK(ratio > 12.0);  // 16 asymptotically
}

TEST_CASE("monotone cubic does not overshoot a step") {
    std::vector<double> x{0, 1, 2, 3, 4, 5}, y{0, 0, 0, 1, 1, 1};
    MonotoneCubic f(x, y);
    for (int k = 0; k <= 500; ++k) {
        const double v = f(k / 100.0);
        CHECK(v >= -1e-15);
        CHECK(v <= 1.0 + 1e-15);
    }
    CHECK(f(2.0) == 0.0);
    CHECK(f(3.0) == 1.0);
}

TEST_CASE("monotone cubic derivative on a line") {
    std::vector<double> x{0, 0.5, 1.5, 2, 3}, y;
    for (double xi : x) y.push_back(3 * xi - 1);
    MonotoneCubic f(x, y);
    for (double t : {0.1, 0.7, 1.9, 2.5}) {
        CHECK(f(t) == doctest::Approx(3 * t - 1).epsilon(1e-14));
        CHECK(f.derivative(t) == doctest::Approx(3.0).epsilon(1e-12));
    }
}
