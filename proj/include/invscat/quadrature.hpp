#pragma once

// Thin adaptive Gauss-Kronrod layer over Boost.Math. Every integral in the
// library goes through here so the tolerance policy lives in one place.

#include "invscat/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace invscat::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
};

// deep enough for every smooth integrand here; bounded so a tolerance at
// roundoff level cannot trigger exponential refinement
inline constexpr unsigned default_max_depth = 12;

template <class F>
Result integrate(F&& f, double a, double b, double rel_tol, unsigned max_depth = default_max_depth) {
    if (a == b) return {};
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, max_depth, rel_tol, &err, &l1);
    if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value");
    return {v, err};
}

/// Integral over [0, inf) after the map t = scale * u / (1 - u), u in [0, 1).
/// `scale` should be the length over which f changes appreciably.
template <class F>
Result integrate_half_line(F&& f, double scale, double rel_tol,
                           unsigned max_depth = default_max_depth) {
    auto mapped = [&](double u) {
        if (u >= 1.0) return 0.0;
        const double om = 1.0 - u;
        const double t = scale * u / om;
        return f(t) * scale / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, rel_tol, max_depth);
}

}  // namespace invscat::quad
