#pragma once

// Newton and relativistic Newton dynamics at fixed energy: trajectories,
// free asymptotes, the scattering map and the nontrapping constants.

#include "invscat/fields.hpp"
#include "invscat/ode.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace invscat {

/// Fixed-energy bundle. For the relativistic regime the integrated state is
/// (x, p) with p the momentum; for the nonrelativistic one it is (x, v).
struct EnergyContext {
    Regime regime = Regime::nonrelativistic;
    double E = 0.0;
    double c = std::numeric_limits<double>::infinity();

    static EnergyContext nonrelativistic(double E);
    static EnergyContext relativistic(double E, double c);

    bool relativistic_regime() const { return regime == Regime::relativistic; }
    /// |v_-| at infinity: sqrt(2E), or c sqrt(1 - c^4/E^2).
    double speed_at_infinity() const;
    /// Speed of a particle at potential energy V.
    double speed_at(double V) const;
    /// Coefficient in front of B(x) v in the force: 1, or 1/c.
    double coupling() const;

    Vec momentum(const Vec& v) const;
    Vec velocity(const Vec& p) const;
    /// Energy integral: |v|^2/2 + V or c^2 sqrt(1 + |p|^2/c^2) + V.
    double energy(const FieldModel& model, const Vec& x, const Vec& v) const;

    void validate() const;
};

struct NontrappingReport {
    double C_E = 0.0;
    double R_E = 0.0;
    /// k in |x(t)|^2 >= R_E^2 + k (t - T)^2 after the outward crossing at T.
    double escape_coefficient = 0.0;
    /// The two terms of the relativistic minimum (NaN for the nonrelativistic regime).
    double rel_term_energy = std::numeric_limits<double>::quiet_NaN();
    double rel_term_force = std::numeric_limits<double>::quiet_NaN();
};

NontrappingReport nontrapping_constants(const EnergyContext& ctx, const ShortRangeBounds& bounds,
                                        int n);

/// Smallest energy E1 with R_E(E1) <= R, by bisection (C_E is increasing in E).
/// Empty when no such energy exists (relativistic: C_E^rel saturates).
std::optional<double> energy_threshold_E1(Regime regime, double c, const ShortRangeBounds& bounds,
                                          int n, double R);

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(EnergyContext ctx, int n, ode::Solution sol, double tol, const FieldModel& model);

    const EnergyContext& context() const { return ctx_; }
    int dimension() const { return n_; }
    double t_begin() const { return dense_.t_begin(); }
    double t_end() const { return dense_.t_end(); }

    Vec position(double t) const;
    Vec velocity(double t) const;
    /// Raw integrated state (x, v) or (x, p).
    Vec state(double t) const { return dense_(t); }

    const ode::DenseSolution& dense() const { return dense_; }
    const ode::Stats& stats() const { return stats_; }

    /// Energy residual (E(t_k) - E)/scale at the accepted nodes; the scale is
    /// |E|, or the kinetic part E - c^2 in the relativistic regime.
    const std::vector<double>& energy_residuals() const { return energy_residual_; }
    double max_energy_drift() const { return max_drift_; }
    /// Set when the drift exceeds 100x the integrator tolerance.
    bool drift_flagged() const { return drift_flagged_; }
    double tolerance() const { return tol_; }

private:
    EnergyContext ctx_;
    int n_ = 0;
    ode::DenseSolution dense_;
    ode::Stats stats_;
    std::vector<double> energy_residual_;
    double max_drift_ = 0.0;
    bool drift_flagged_ = false;
    double tol_ = 0.0;
};

/// Callback after each accepted step with (t, x, v); may extend or cut t_end.
using StepObserver = std::function<bool(double t, const Vec& x, const Vec& v, double& t_end)>;

/// Integrates from (x0, v0) at time t0 up to t1. The energy of the initial
/// state must equal ctx.E to 1e-12 relative.
Trajectory integrate(const FieldModel& model, const EnergyContext& ctx, const Vec& x0,
                     const Vec& v0, double t0, double t1, double tol,
                     const StepObserver& observer = {});

struct AsymptoteData {
    Vec v_minus, x_minus, v_plus, x_plus;
    /// Size of the tail correction applied at the start (|y_-(t0)|, |y_-'(t0)|).
    double residual_minus = 0.0;
    /// Spread of the (v_+, x_+) estimates taken across the tail window.
    double residual_plus = 0.0;
};

struct ShootOptions {
    double tol = 1e-9;           // a priori budget for the incoming tail
    double ode_tol = 1e-11;      // integrator tolerance
    double t0_override = 0.0;    // > 0 forces |t0|
    double t0_cap = 1e6;
};

/// Start time |t0| from the a priori tail bound; throws NumericalError beyond the cap.
double shooting_start_time(const EnergyContext& ctx, const ShortRangeBounds& bounds, int n,
                           double speed, double x_minus_norm, const ShootOptions& opt);

struct ScatteringRun {
    Trajectory trajectory;
    AsymptoteData asymptotes;
    double t_start = 0.0;
    double t_escape = 0.0;  // first time with |x| >= R_E and x.v > 0
    NontrappingReport nontrapping;
};

/// Initialises on the incoming asymptote at t0 << 0 (with a first-order
/// correction of the tail force) and integrates forward to t_end.
Trajectory shoot_from_minus_infinity(const FieldModel& model, const EnergyContext& ctx,
                                     const Vec& v_minus, const Vec& x_minus, double t_end,
                                     const ShootOptions& opt, AsymptoteData* incoming = nullptr,
                                     const StepObserver& observer = {});

/// v_+, x_+ from the final part [t_end - window, t_end] of an escaped trajectory.
AsymptoteData fit_outgoing_asymptote(const FieldModel& model, const Trajectory& traj,
                                     double tail_window, double tol = 1e-10);

/// Full composition: shoot, run until escape, extend by the tail window, fit.
ScatteringRun scattering_map(const FieldModel& model, const EnergyContext& ctx, const Vec& v_minus,
                             const Vec& x_minus, const ShootOptions& opt = {});

struct EscapeCheck {
    double T = 0.0;  // outward crossing of |x| = R_E
    /// min over t > T of (|x|^2 - R_E^2) / (k (t-T)^2); >= 1 when the estimate holds.
    double worst_ratio = std::numeric_limits<double>::infinity();
    /// min of d^2/dt^2 (|x|^2/2) while |x| >= R_E.
    double min_I_ddot = std::numeric_limits<double>::infinity();
    int samples = 0;
};

EscapeCheck check_escape(const FieldModel& model, const Trajectory& traj,
                         const NontrappingReport& report, int samples = 400);

}  // namespace invscat
