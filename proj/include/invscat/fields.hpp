#pragma once

// Electromagnetic field models (V, B) for the Newton equation
//   x'' = -grad V(x) + B(x) x'
// together with their short-range bounds and the structural audits the
// theory needs: decay bounds, the closedness identity for B, and the
// discrete short-range norm.

#include "invscat/types.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace invscat {

/// Decay constants: |d^j V| <= beta[|j|] (1+|x|)^(-alpha-|j|) for |j| <= 2 and
/// |d^j B_ik| <= beta[|j|+1] (1+|x|)^(-alpha-1-|j|) for |j| <= 1.
struct ShortRangeBounds {
    double alpha = 2.0;
    std::array<double, 3> beta{1.0, 1.0, 1.0};
    double lambda = 1.0;

    /// Throws ValidationError unless alpha > 1 and every constant is positive.
    void validate() const;
};

/// The exterior bounds of a radial profile on (R, inf):
/// sup (1+r)^alpha |W| <= beta0 and sup (1+r)^(alpha+1) |W'| <= beta1.
struct ProfileBounds {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double alpha = 2.0;
};

/// A scalar radial profile W(r), valid (and bounded) on (R, inf).
class RadialProfile {
public:
    explicit RadialProfile(double inner_radius) : inner_radius_(inner_radius) {}
    virtual ~RadialProfile() = default;

    virtual double W(double r) const = 0;
    virtual double dW(double r) const = 0;
    virtual double d2W(double r) const = 0;
    /// W'(r)/r, with its limit W''(0) at the origin.
    virtual double dW_over_r(double r) const { return r > 0.0 ? dW(r) / r : d2W(0.0); }
    virtual std::string kind() const = 0;
    virtual ProfileBounds bounds() const = 0;

    double inner_radius() const { return inner_radius_; }

private:
    double inner_radius_;
};

class ZeroProfile final : public RadialProfile {
public:
    explicit ZeroProfile(double inner_radius = 0.0, double alpha = 2.0)
        : RadialProfile(inner_radius), alpha_(alpha) {}
    double W(double) const override { return 0.0; }
    double dW(double) const override { return 0.0; }
    double d2W(double) const override { return 0.0; }
    std::string kind() const override { return "zero"; }
    ProfileBounds bounds() const override { return {0.0, 0.0, alpha_}; }

private:
    double alpha_;
};

/// W(r) = A (1+r)^(-alpha); bounds are exact: beta0 = |A|, beta1 = |A| alpha.
class ShiftedPowerProfile final : public RadialProfile {
public:
    ShiftedPowerProfile(double amplitude, double alpha, double inner_radius);
    double W(double r) const override;
    double dW(double r) const override;
    double d2W(double r) const override;
    std::string kind() const override { return "shifted_power"; }
    ProfileBounds bounds() const override;
    double amplitude() const { return A_; }

private:
    double A_;
    double alpha_;
};

/// W(r) = A (1+r^2)^(-alpha/2), smooth at the origin.
class AlgebraicProfile final : public RadialProfile {
public:
    AlgebraicProfile(double amplitude, double alpha, double inner_radius);
    double W(double r) const override;
    double dW(double r) const override;
    double d2W(double r) const override;
    double dW_over_r(double r) const override;
    std::string kind() const override { return "algebraic"; }
    ProfileBounds bounds() const override { return bounds_; }
    double amplitude() const { return A_; }

private:
    double A_;
    double alpha_;
    ProfileBounds bounds_;
};

/// An evaluable pair (V, B) on R^n. Immutable after construction; every
/// evaluator is const and thread-safe.
class FieldModel {
public:
    explicit FieldModel(int dimension);
    virtual ~FieldModel() = default;

    int dimension() const { return n_; }

    virtual double potential(const Vec& x) const = 0;
    virtual Vec gradient(const Vec& x) const = 0;
    virtual Mat hessian(const Vec& x) const = 0;

    virtual bool has_magnetic() const { return false; }
    /// Antisymmetric n x n matrix B(x).
    virtual Mat magnetic(const Vec& x) const;
    /// Matrix of partials dB_ik/dx_l for fixed l.
    virtual Mat magnetic_derivative(const Vec& x, int l) const;

    /// Radius beyond which B == 0 and V(x) = W(|x|), when the model has one.
    virtual std::optional<double> radial_radius() const { return std::nullopt; }
    virtual std::shared_ptr<const RadialProfile> exterior_profile() const { return nullptr; }

    virtual std::string kind() const = 0;

    const ShortRangeBounds& bounds() const { return bounds_; }
    /// Replaces the bounds (user-declared values); validated.
    void declare_bounds(const ShortRangeBounds& b);

protected:
    void set_bounds(const ShortRangeBounds& b) { bounds_ = b; }

private:
    int n_;
    ShortRangeBounds bounds_;
};

/// V == 0, B == 0.
class ZeroField final : public FieldModel {
public:
    explicit ZeroField(int dimension, double alpha = 2.0);
    double potential(const Vec&) const override { return 0.0; }
    Vec gradient(const Vec& x) const override { return Vec::Zero(x.size()); }
    Mat hessian(const Vec& x) const override { return Mat::Zero(x.size(), x.size()); }
    std::optional<double> radial_radius() const override { return 0.0; }
    std::shared_ptr<const RadialProfile> exterior_profile() const override { return profile_; }
    std::string kind() const override { return "zero"; }

private:
    std::shared_ptr<const RadialProfile> profile_;
};

/// V(x) = W(rho(|x|)) with a C^2 core regularisation rho(r) for r < r_s
/// (rho(r) = r beyond r_s), so profiles with a kink at the origin such as
/// (1+r)^(-alpha) still give a C^2 potential. B == 0. Bounds are measured on
/// a dense radial grid, which is exact up to grid resolution for radial V.
class RadialPotentialField final : public FieldModel {
public:
    RadialPotentialField(int dimension, std::shared_ptr<const RadialProfile> profile,
                         double smoothing_radius, double radial_radius);

    double potential(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Mat hessian(const Vec& x) const override;
    std::optional<double> radial_radius() const override { return radial_radius_; }
    std::shared_ptr<const RadialProfile> exterior_profile() const override { return profile_; }
    std::string kind() const override { return "radial"; }

    /// f(r) = W(rho(r)) and its first two derivatives.
    std::array<double, 3> radial_jet(double r) const;

private:
    std::shared_ptr<const RadialProfile> profile_;
    double rs_;
    double radial_radius_;
};

/// Adds a compactly supported magnetic field B = dA to a base model, with
/// A = (b0/2) psi(|x|^2) (-x_2, x_1, 0, ...), psi(s) = (1 - s/Rc^2)^4 on
/// s < Rc^2. Closed by construction; B == 0 for |x| >= Rc.
class MagneticBumpField final : public FieldModel {
public:
    MagneticBumpField(std::shared_ptr<const FieldModel> base, double amplitude,
                      double cutoff_radius);

    double potential(const Vec& x) const override { return base_->potential(x); }
    Vec gradient(const Vec& x) const override { return base_->gradient(x); }
    Mat hessian(const Vec& x) const override { return base_->hessian(x); }
    bool has_magnetic() const override { return true; }
    Mat magnetic(const Vec& x) const override;
    Mat magnetic_derivative(const Vec& x, int l) const override;
    std::optional<double> radial_radius() const override;
    std::shared_ptr<const RadialProfile> exterior_profile() const override {
        return base_->exterior_profile();
    }
    std::string kind() const override { return "magnetic_bump"; }

private:
    std::shared_ptr<const FieldModel> base_;
    double b0_;
    double rc_;
};

/// -grad V(x) + coupling * B(x) v. coupling is 1 for the nonrelativistic
/// equation and 1/c for the relativistic one.
Vec eval_force(const FieldModel& model, const Vec& x, const Vec& v, double coupling = 1.0);

/// Deterministic, nested point cloud: radius 0, then radial_intervals+1
/// log-spaced radii in [r_min_positive, r_max], times `directions` quasi-uniform
/// unit vectors. Doubling either count yields a superset of points.
struct SampleSpec {
    int radial_intervals = 15;
    double r_min_positive = 1e-2;
    double r_max = 1e3;
    int directions = 64;

    SampleSpec doubled() const;
};

std::vector<Vec> point_cloud(int dimension, const SampleSpec& spec);

/// Discrete supremum approximating the short-range norm ||(V, B)||.
double shortrange_norm(const FieldModel& model, const SampleSpec& spec);

struct ClosednessReport {
    double max_residual = 0.0;
    Vec worst_point;
};

/// Max over points and index triples of the cyclic sum
/// dB_ik/dx_l + dB_li/dx_k + dB_kl/dx_i using central differences of step h.
ClosednessReport check_closedness(const FieldModel& model, const std::vector<Vec>& points, double h);

struct BoundsAudit {
    /// Largest observed |d^j V| (1+|x|)^(alpha+|j|) / beta[|j|], per order 0..2.
    std::array<double, 3> potential_ratio{};
    /// Largest observed |d^j B| (1+|x|)^(alpha+1+|j|) / beta[|j|+1], per order 0..1.
    std::array<double, 2> magnetic_ratio{};
    double max_antisymmetry_defect = 0.0;
    bool passed() const;
};

BoundsAudit audit_bounds(const FieldModel& model, const std::vector<Vec>& points);

}  // namespace invscat
