#pragma once

// The standard test setup: W(r) = (1+r)^-2 beyond R = 1, core smoothed
// below r = 0.5, in the plane unless stated otherwise.

#include "invscat/fields.hpp"
#include "invscat/radial.hpp"

#include <memory>

namespace fixture {

inline std::shared_ptr<const invscat::ShiftedPowerProfile> profile() {
    return std::make_shared<invscat::ShiftedPowerProfile>(1.0, 2.0, 1.0);
}

inline std::shared_ptr<const invscat::RadialPotentialField> field(int n = 2) {
    return std::make_shared<invscat::RadialPotentialField>(n, profile(), 0.5, 1.0);
}

inline invscat::EnergyContext nonrel() { return invscat::EnergyContext::nonrelativistic(10.0); }
inline invscat::EnergyContext rel(double c = 10.0) { return invscat::EnergyContext::relativistic(c * c + 10.0, c); }

inline invscat::Vec vec(std::initializer_list<double> xs) {
    invscat::Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace fixture
