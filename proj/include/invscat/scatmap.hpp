#pragma once

// Two reductions of the scattering map: entry/exit data on a sphere
// |x| = R, and the deflection function read off the outgoing direction of
// the planar radial family.

#include "invscat/radial.hpp"

#include <optional>
#include <vector>

namespace invscat {

struct BoundaryDatum {
    Vec q0, q;    // entry and exit points, |q0| = |q| = R
    Vec k0, k;    // velocities at entry and exit
    double t_minus = 0.0, t_plus = 0.0;
    double R = 0.0;
    /// Relative energy error at the two crossings (scale as in Trajectory).
    double energy_residual = 0.0;

    double transit_time() const { return t_plus - t_minus; }
};

/// Entry/exit data of the orbit with incoming asymptote (v_minus, x_minus).
/// Empty when the orbit never enters the open ball ("misses ball").
/// ValidationError when R is below the model's radial radius or R_E > R
/// (energy below E1); InvariantViolation on more than one visit.
std::optional<BoundaryDatum> extract_boundary_data(const FieldModel& model, const EnergyContext& ctx,
                                                   const Vec& v_minus, const Vec& x_minus, double R,
                                                   const ShootOptions& opt = {});

struct BoundaryReplay {
    double position_error = 0.0;  // |x(t_plus) - q|
    double velocity_error = 0.0;  // |v(t_plus) - k|
};

/// Integrates from (q0, k0) over the transit time and compares with (q, k).
/// k0 is first put back on the energy shell.
BoundaryReplay replay_boundary(const FieldModel& model, const EnergyContext& ctx,
                               const BoundaryDatum& d, double tol = 1e-12);

struct AngleRecord {
    double q = 0.0;
    /// Polar angle of v_+ in (-pi, pi].
    double raw_angle = 0.0;
    /// Swept angle Theta = q g (or E q g), raw_angle + pi/2 on the branch
    /// picked by continuity from large q.
    double unwrapped = 0.0;
};

/// Runs the scattering map on x_- = (q/|v|) e1, v_- = |v| e2 for each q.
std::vector<AngleRecord> sample_map_angles(const FieldModel& model, const EnergyContext& ctx,
                                           const std::vector<double>& q, const ShootOptions& opt = {});

/// Unwraps the records in place, from the largest q down (the branch of the
/// largest q is the one nearest the free value), and builds the curve.
/// Rejects adjacent jumps larger than pi/2.
DeflectionCurve deflection_from_map(std::vector<AngleRecord>& records, const CurveMeta& meta);

/// sample_map_angles on log_grid(beta, grid) followed by deflection_from_map.
DeflectionCurve map_deflection(const RadialScatteringContext& rc, const FieldModel& model,
                               const DeflectionGrid& grid = {}, const ShootOptions& opt = {});

}  // namespace invscat
