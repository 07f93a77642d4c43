#pragma once

// Dormand-Prince 5(4) with Hairer's continuous extension and PI step-size
// control. Forward integration only; every accepted step is kept so the
// solution can be evaluated anywhere in [t_begin, t_end].

#include "invscat/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace invscat::ode {

using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

/// Called after every accepted step. May move `t_end` (e.g. once an escape
/// event is seen). Returning false stops the integration at the current step.
using Observer = std::function<bool(double t, const Vec& y, double& t_end)>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects the step automatically
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 5'000'000;
    /// Optional state-dependent cap on the next step (e.g. a fraction of the
    /// distance to the interaction region), so that no step can leap over it.
    std::function<double(double t, const Vec& y)> step_limit;
};

class DenseSolution {
public:
    struct Segment {
        double t0 = 0.0;
        double h = 0.0;
        std::array<Vec, 5> coeff;
    };

    DenseSolution() = default;
    DenseSolution(double t0, Vec y0);

    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }
    std::size_t dim() const { return static_cast<std::size_t>(y_.front().size()); }

    /// State at time t; t must lie in [t_begin, t_end].
    Vec operator()(double t) const;

    const std::vector<double>& times() const { return t_; }
    const std::vector<Vec>& states() const { return y_; }
    const std::vector<Segment>& segments() const { return seg_; }

    void append(Segment seg, double t1, Vec y1);

private:
    std::vector<double> t_;
    std::vector<Vec> y_;
    std::vector<Segment> seg_;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

struct Solution {
    DenseSolution dense;
    Stats stats;
    bool stopped_by_observer = false;
};

/// Integrates y' = f(t, y) from (t0, y0) to t_end > t0.
/// Throws NumericalError on step-size underflow or step-count exhaustion;
/// the message carries the last accepted time.
Solution dopri5(const Rhs& f, double t0, const Vec& y0, double t_end, const Options& opt,
                const Observer& observer = {});

}  // namespace invscat::ode
