#pragma once

#include <span>
#include <vector>

namespace invscat {

/// Piecewise cubic Hermite interpolant with fourth-order node slopes
/// (five-point Lagrange differentiation) passed through a Hyman-type
/// monotonicity filter. On strictly monotone, well-resolved data the filter
/// is inactive and the interpolant is O(h^4); where the data change direction
/// the node slope is zeroed, so the interpolant never overshoots.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    bool contains(double x) const;

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    const std::vector<double>& slopes() const { return d_; }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

}  // namespace invscat
