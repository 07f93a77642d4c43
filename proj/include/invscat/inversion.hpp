#pragma once

// Abel inversion of the deflection function: H(sigma), chi(sigma) = 1/r_min,
// its inverse phi, and the exterior profile W recovered from phi.

#include "invscat/radial.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace invscat {

struct AbelTable {
    std::vector<double> sigma;
    std::vector<double> H;
    std::vector<double> dH;
    std::shared_ptr<const DeflectionCurve> curve;  // provenance; also used to evaluate the chi integrand
};

/// Geometric grid of `count` points on [lo_factor, hi_factor] * beta^-2.
std::vector<double> sigma_grid(double beta, int count = 128, double lo_factor = 1e-6, double hi_factor = 0.999);

/// H(sigma) = int_0^{pi/2} g(sigma^{-1/2}/sin psi) dpsi and its sigma-derivative,
/// differentiated under the integral with the curve's derivative.
AbelTable abel_transform(std::shared_ptr<const DeflectionCurve> curve, const std::vector<double>& sigma);

double abel_H(const DeflectionCurve& curve, double sigma);
double abel_dH(const DeflectionCurve& curve, double sigma);

struct AbelConsistency {
    double max_H_residual = 0.0;       // relative, first identity
    double max_dlogchi_residual = 0.0; // relative, second identity
};

/// Compares the tabulated H with the integral over the true chi = 1/r_min, and
/// kappa (pi sqrt(sigma))^-1 dH/dsigma with d ln chi/dsigma.
AbelConsistency consistency_check_H(const AbelTable& table, const RadialScatteringContext& truth);

/// The regularised integrand d/ds ln(chi/(pref sqrt s)) evaluated from the curve.
double chi_log_integrand(const DeflectionCurve& curve, double s);

class ChiTable {
public:
    ChiTable() = default;
    ChiTable(std::vector<double> sigma, std::vector<double> chi);

    const std::vector<double>& sigma() const { return sigma_; }
    const std::vector<double>& chi_values() const { return chi_; }
    double chi(double sigma) const;
    /// Inverse of chi by bisection, to 1e-12 relative in sigma.
    double phi(double x) const;
    double chi_min() const { return chi_.front(); }
    double chi_max() const { return chi_.back(); }

private:
    std::vector<double> sigma_, chi_;
    MonotoneCubic log_chi_;
};

/// sqrt(2E), or c sqrt(E^2 - c^4)/E.
double chi_prefactor(const EnergyContext& ctx);

ChiTable reconstruct_chi(const AbelTable& table, const EnergyContext& ctx);

struct ReconstructionResult {
    Regime regime = Regime::nonrelativistic;
    double E = 0.0, c = 0.0, beta = 0.0, beta_prime = 0.0;
    std::vector<double> s, W_rec;
    std::vector<double> W_true, abs_err, rel_err;  // empty without ground truth
    double sup_abs_err = 0.0, sup_rel_err = 0.0, l2_rel_err = 0.0;
    bool has_truth() const { return !W_true.empty(); }
};

/// Radii on which W can be recovered: from max(beta', 1/chi_max) up to
/// min(hi_factor * beta', 1/chi_min), geometric.
std::vector<double> radius_grid(const ChiTable& chi, double beta_prime, int count = 200, double hi_factor = 5.0);

ReconstructionResult reconstruct_W(const ChiTable& chi, const EnergyContext& ctx, const std::vector<double>& s,
                                   const RadialProfile* truth = nullptr);

/// beta' with the assertion r_min(beta) <= beta'.
double compute_beta_prime(const RadialScatteringContext& rc);

/// Whole chain from a curve: H, chi, W on (beta', hi_factor beta').
struct InversionOutput {
    AbelTable abel;
    ChiTable chi;
    ReconstructionResult result;
};

InversionOutput invert_curve(std::shared_ptr<const DeflectionCurve> curve, const EnergyContext& ctx,
                             double beta_prime, int sigma_points = 128, int radius_points = 200,
                             double hi_factor = 5.0, const RadialProfile* truth = nullptr);

}  // namespace invscat
