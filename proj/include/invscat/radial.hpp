#pragma once

// Spherically symmetric exteriors: the admissible impact threshold beta,
// the perihelion r_min(q), and the deflection function g(q) by singular
// quadrature and by direct simulation.

#include "invscat/dynamics.hpp"
#include "invscat/monotone_cubic.hpp"

#include <memory>
#include <vector>

namespace invscat {

/// Lower admissible impact parameter. Relativistic: the three-term maximum,
/// rejecting a negative discriminant.
double compute_beta(const EnergyContext& ctx, const ProfileBounds& bounds, double R);

/// Formula value of the outer reconstruction radius beta' (no assertion).
/// Relativistic: the upper perihelion bound evaluated at q = beta.
double beta_prime_formula(const EnergyContext& ctx, const ProfileBounds& bounds, double beta);

struct RadialScatteringContext {
    EnergyContext ctx;
    std::shared_ptr<const RadialProfile> profile;
    ProfileBounds bounds;
    double R = 0.0;
    double beta = 0.0;
    double beta_prime = 0.0;
    double q_max = 0.0;
};

/// q_max = q_max_factor * beta.
RadialScatteringContext make_radial_context(const EnergyContext& ctx,
                                            std::shared_ptr<const RadialProfile> profile,
                                            double q_max_factor = 100.0);

/// The radicand whose largest zero is r_min: E - W - q^2/(2r^2), or
/// (E-W)^2 - c^4 - q^2 E^2/(c^2 r^2).
double perihelion_function(const RadialScatteringContext& rc, double q, double r);

struct PerihelionBounds {
    double lower = 0.0;
    double upper = 0.0;  // +inf when the upper formula has no real value
};
PerihelionBounds r_min_bounds(const RadialScatteringContext& rc, double q);

double r_min(const RadialScatteringContext& rc, double q);
double r_min_derivative(const RadialScatteringContext& rc, double q);

/// g(q) by adaptive Gauss-Kronrod after s = 1/r, s = chi sin(theta).
double deflection_quadrature(const RadialScatteringContext& rc, double q, double rel_tol = 1e-12);

struct DeflectionOdeResult {
    double g = 0.0;
    double swept_angle = 0.0;                 // q g (nonrel) or E q g (rel)
    double angular_momentum_residual = 0.0;  // relative
    double radial_energy_residual = 0.0;     // absolute, on the radial identity
    double perihelion_asymmetry = 0.0;       // max |r(t_q+s) - r(t_q-s)|
    ScatteringRun run;
};

/// g(q) from a simulated orbit on the standard planar family:
/// x_- = (q/|v|) e1, v_- = |v| e2.
DeflectionOdeResult deflection_ode(const RadialScatteringContext& rc, const FieldModel& model,
                                   double q, const ShootOptions& opt = {});

/// Swept polar angle of a planar run, continuous along the orbit.
double swept_polar_angle(const Trajectory& traj, const AsymptoteData& a);

struct CurveMeta {
    Regime regime = Regime::nonrelativistic;
    double E = 0.0;
    double c = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    double alpha = 2.0;
};

/// Sampled q -> g(q) on [beta, q_max]. Internally interpolates the swept
/// angle Theta(q) = q g(q) against ln q (monotone cubic); beyond q_max the
/// tail Theta_inf (1 + a q^-alpha + b q^-(alpha+1)) is used, fitted on the
/// last decade.
class DeflectionCurve {
public:
    DeflectionCurve() = default;
    DeflectionCurve(CurveMeta meta, std::vector<double> q, std::vector<double> g);

    const CurveMeta& meta() const { return meta_; }
    const std::vector<double>& q() const { return q_; }
    const std::vector<double>& g_samples() const { return g_; }
    double q_min() const { return q_.front(); }
    double q_max() const { return q_.back(); }

    /// Free-field limit of q g(q): pi, or pi/E.
    double theta_infinity() const;
    /// a in the tail above
    double tail_coefficient() const;

    double theta(double q) const;
    /// dTheta / d ln q
    double theta_log_derivative(double q) const;
    double g(double q) const;
    double dg(double q) const;

    /// Throws ValidationError unless [lo, hi] lies inside [q_min, q_max].
    void require_coverage(double lo, double hi) const;

private:
    void check_q(double q) const;
    double tail_relative(double q) const;
    double tail_relative_log_derivative(double q) const;

    CurveMeta meta_;
    std::vector<double> q_, g_;
    MonotoneCubic theta_;
    double a_ = 0.0, b_ = 0.0;  // scaled by q_max
};

struct DeflectionGrid {
    int points_per_decade = 96;
    double decades = 2.0;
};

std::vector<double> log_grid(double lo, const DeflectionGrid& grid);

DeflectionCurve sample_deflection(const RadialScatteringContext& rc, const DeflectionGrid& grid = {},
                                  double rel_tol = 1e-12);

CurveMeta curve_meta(const RadialScatteringContext& rc);

/// Largest |Theta_rel - Theta_nonrel| over geometric impacts b = q/|v| on a
/// log grid in [b_lo, b_hi], the nonrelativistic context taken at energy
/// E - c^2 with the same profile. Both angles by quadrature.
double nonrelativistic_limit_gap(const RadialScatteringContext& rel, double b_lo, double b_hi,
                                 int points = 24);

}  // namespace invscat
