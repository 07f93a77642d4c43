#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace invscat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Regime { nonrelativistic, relativistic };

inline const char* regime_tag(Regime r) {
    return r == Regime::nonrelativistic ? "nonrel" : "rel";
}

/// Bad input: malformed configuration, violated precondition, inadmissible energy.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The numerics could not deliver: step underflow, missing sign change, trapped orbit.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical invariant that must hold by construction was observed to fail.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Planar cross product v1 w2 - v2 w1 on the first two coordinates.
inline double wedge2(const Vec& v, const Vec& w) { return v(0) * w(1) - v(1) * w(0); }

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace invscat
