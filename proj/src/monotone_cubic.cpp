#include "invscat/monotone_cubic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace invscat {

namespace {

// Derivative at x[i] of the Lagrange polynomial through x[lo..lo+m-1].
double lagrange_slope(std::span<const double> x, std::span<const double> y, std::size_t lo,
                      std::size_t m, std::size_t i) {
    double d = 0.0;
    for (std::size_t j = lo; j < lo + m; ++j) {
        // weight of y[j] in p'(x[i])
        // l_j'(x_i) = prod_{k!=i,j}(x_i-x_k) / prod_{k!=j}(x_j-x_k), j != i
        double w = 0.0;
        if (j == i) {
            for (std::size_t k = lo; k < lo + m; ++k)
                if (k != j) w += 1.0 / (x[j] - x[k]);
        } else {
            w = 1.0 / (x[j] - x[i]);
            for (std::size_t k = lo; k < lo + m; ++k)
                if (k != j && k != i) w *= (x[i] - x[k]) / (x[j] - x[k]);
        }
        d += w * y[j];
    }
    return d;
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need >= 2 matching samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("MonotoneCubic: knots not strictly increasing");
    for (double v : y_)
        if (!std::isfinite(v)) throw std::invalid_argument("MonotoneCubic: non-finite sample");

    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) delta[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);

    d_.assign(n, 0.0);
    const std::size_t m = std::min<std::size_t>(5, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i >= m / 2 ? i - m / 2 : 0;
        lo = std::min(lo, n - m);
        d_[i] = lagrange_slope(x_, y_, lo, m, i);
    }

    for (std::size_t i = 0; i < n; ++i) {
        double bound;
        double dir;
        if (i == 0) {
            dir = delta[0];
            bound = 3.0 * std::abs(delta[0]);
        } else if (i == n - 1) {
            dir = delta[n - 2];
            bound = 3.0 * std::abs(delta[n - 2]);
        } else {
            if (delta[i - 1] * delta[i] <= 0.0) {
                d_[i] = 0.0;
                continue;
            }
            dir = delta[i];
            bound = 3.0 * std::min(std::abs(delta[i - 1]), std::abs(delta[i]));
        }
        if (dir == 0.0 || d_[i] * dir < 0.0) {
            d_[i] = 0.0;
        } else if (std::abs(d_[i]) > bound) {
            d_[i] = std::copysign(bound, dir);
        }
    }
}

bool MonotoneCubic::contains(double x) const {
    const double slack = 1e-12 * std::max(std::abs(x_.front()), std::abs(x_.back()));
    return x >= x_.front() - slack && x <= x_.back() + slack;
}

std::size_t MonotoneCubic::interval(double x) const {
    if (!contains(x)) throw std::out_of_range("MonotoneCubic: argument outside knot range");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double dh00 = (6 * t2 - 6 * t) / h;
    const double dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = (-6 * t2 + 6 * t) / h;
    const double dh11 = 3 * t2 - 2 * t;
    return dh00 * y_[k] + dh10 * d_[k] + dh01 * y_[k + 1] + dh11 * d_[k + 1];
}

}  // namespace invscat
