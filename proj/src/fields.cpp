#include "invscat/fields.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invscat {

namespace {

constexpr double sup_margin = 1.0001;
constexpr double bound_floor = 1e-12;

double radical_inverse(unsigned long i, unsigned base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

Vec direction(int n, int j) {
    const auto idx = static_cast<unsigned long>(j) + 1;
    Vec d(n);
    if (n == 2) {
        const double th = 2.0 * std::numbers::pi * radical_inverse(idx - 1, 2);
        d << std::cos(th), std::sin(th);
        return d;
    }
    if (n == 3) {
        const double z = 1.0 - 2.0 * radical_inverse(idx, 2);
        const double ph = 2.0 * std::numbers::pi * radical_inverse(idx, 3);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        d << s * std::cos(ph), s * std::sin(ph), z;
        return d;
    }
    for (int k = 0; k < n; ++k) {
        const unsigned base = primes[static_cast<std::size_t>(k) % std::size(primes)];
        const double u = radical_inverse(idx, base);
        d(k) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
    }
    const double nn = d.norm();
    if (nn == 0.0) d(0) = 1.0; else d /= nn;
    return d;
}

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) {
        std::ostringstream os;
        os << "eval_force: non-finite " << what;
        throw ValidationError(os.str());
    }
}

// C^2 core regularisation: rho(r) = 3 rs/8 + 3 r^2/(4 rs) - r^4/(8 rs^3) on
// [0, rs), matching value, slope 1 and curvature 0 at rs.
struct Rho {
    double value, d1, d2, d1_over_r;
};

Rho rho(double r, double rs) {
    if (rs <= 0.0 || r >= rs) return {r, 1.0, 0.0, r > 0.0 ? 1.0 / r : 0.0};
    const double rs3 = rs * rs * rs;
    const double r2 = r * r;
    return {3.0 * rs / 8.0 + 3.0 * r2 / (4.0 * rs) - r2 * r2 / (8.0 * rs3),
            1.5 * r / rs - 0.5 * r * r2 / rs3, 1.5 / rs - 1.5 * r2 / rs3, 1.5 / rs - 0.5 * r2 / rs3};
}

}  // namespace

void ShortRangeBounds::validate() const {
    if (!(alpha > 1.0)) throw ValidationError("short-range bounds: alpha must exceed 1");
    for (double b : beta)
        if (!(b > 0.0) || !std::isfinite(b))
            throw ValidationError("short-range bounds: every beta_k must be positive and finite");
    if (!(lambda > 0.0)) throw ValidationError("short-range bounds: lambda must be positive");
}

// ---------------------------------------------------------------- profiles

ShiftedPowerProfile::ShiftedPowerProfile(double amplitude, double alpha, double inner_radius)
    : RadialProfile(inner_radius), A_(amplitude), alpha_(alpha) {
    if (!(alpha > 1.0)) throw ValidationError("shifted_power profile: alpha must exceed 1");
}

double ShiftedPowerProfile::W(double r) const { return A_ * std::pow(1.0 + r, -alpha_); }
double ShiftedPowerProfile::dW(double r) const {
    return -A_ * alpha_ * std::pow(1.0 + r, -alpha_ - 1.0);
}
double ShiftedPowerProfile::d2W(double r) const {
    return A_ * alpha_ * (alpha_ + 1.0) * std::pow(1.0 + r, -alpha_ - 2.0);
}
ProfileBounds ShiftedPowerProfile::bounds() const {
    return {std::abs(A_), std::abs(A_) * alpha_, alpha_};
}

AlgebraicProfile::AlgebraicProfile(double amplitude, double alpha, double inner_radius)
    : RadialProfile(inner_radius), A_(amplitude), alpha_(alpha) {
    if (!(alpha > 1.0)) throw ValidationError("algebraic profile: alpha must exceed 1");
    // (1+r)^alpha |W| peaks at r = 1; the derivative weight is sampled.
    const double R = inner_radius;
    const double b0 = R < 1.0 ? std::pow(2.0, alpha / 2.0)
                              : std::pow((1.0 + R) * (1.0 + R) / (1.0 + R * R), alpha / 2.0);
    double b1 = 0.0;
    const double lo = std::log(std::max(R, 1e-6));
    const double hi = std::log(1e8);
    constexpr int samples = 20000;
    for (int i = 0; i <= samples; ++i) {
        const double r = std::exp(lo + (hi - lo) * i / samples);
        b1 = std::max(b1, std::pow(1.0 + r, alpha + 1.0) * std::abs(dW(r)) / std::abs(A_ == 0 ? 1 : A_));
    }
    b1 = std::max(b1, alpha);  // limit as r -> inf
    bounds_ = {std::abs(A_) * b0, std::abs(A_) * b1 * sup_margin, alpha};
}

double AlgebraicProfile::W(double r) const { return A_ * std::pow(1.0 + r * r, -alpha_ / 2.0); }
double AlgebraicProfile::dW(double r) const { return r * dW_over_r(r); }
double AlgebraicProfile::d2W(double r) const {
    const double u = 1.0 + r * r;
    return -A_ * alpha_ * std::pow(u, -alpha_ / 2.0 - 2.0) * (u - (alpha_ + 2.0) * r * r);
}
// regular at the origin
double AlgebraicProfile::dW_over_r(double r) const {
    return -A_ * alpha_ * std::pow(1.0 + r * r, -alpha_ / 2.0 - 1.0);
}

// ----------------------------------------------------------------- models

FieldModel::FieldModel(int dimension) : n_(dimension) {
    if (dimension < 2) throw ValidationError("field model: dimension must be >= 2");
}

Mat FieldModel::magnetic(const Vec& x) const { return Mat::Zero(x.size(), x.size()); }

Mat FieldModel::magnetic_derivative(const Vec& x, int) const {
    return Mat::Zero(x.size(), x.size());
}

void FieldModel::declare_bounds(const ShortRangeBounds& b) {
    b.validate();
    bounds_ = b;
}

ZeroField::ZeroField(int dimension, double alpha)
    : FieldModel(dimension), profile_(std::make_shared<ZeroProfile>(0.0, alpha)) {
    ShortRangeBounds b;
    b.alpha = alpha;
    b.validate();
    set_bounds(b);
}

RadialPotentialField::RadialPotentialField(int dimension,
                                           std::shared_ptr<const RadialProfile> profile,
                                           double smoothing_radius, double radial_radius)
    : FieldModel(dimension), profile_(std::move(profile)), rs_(smoothing_radius),
      radial_radius_(radial_radius) {
    if (!profile_) throw ValidationError("radial field: missing profile");
    if (smoothing_radius < 0.0 || radial_radius < smoothing_radius)
        throw ValidationError("radial field: need 0 <= smoothing radius <= radial radius");

    const double alpha = profile_->bounds().alpha;
    std::array<double, 3> sup{};
    auto visit = [&](double r) {
        const auto [f, f1, f2] = radial_jet(r);
        const Rho p = rho(r, rs_);
        const double f1_over_r =
            (rs_ > 0.0 && r < rs_) ? profile_->dW(p.value) * p.d1_over_r : profile_->dW_over_r(r);
        const double w = 1.0 + r;
        sup[0] = std::max(sup[0], std::pow(w, alpha) * std::abs(f));
        sup[1] = std::max(sup[1], std::pow(w, alpha + 1.0) * std::abs(f1));
        sup[2] = std::max(sup[2], std::pow(w, alpha + 2.0) * std::max(std::abs(f2), std::abs(f1_over_r)));
    };
    visit(0.0);
    constexpr int samples = 40000;
    const double lo = std::log(1e-4), hi = std::log(1e7);
    for (int i = 0; i <= samples; ++i) visit(std::exp(lo + (hi - lo) * i / samples));

    ShortRangeBounds b;
    b.alpha = alpha;
    for (std::size_t k = 0; k < 3; ++k) b.beta[k] = std::max(bound_floor, sup[k] * sup_margin);
    b.lambda = std::max({b.beta[0], b.beta[1], b.beta[2]});
    b.validate();
    set_bounds(b);
}

std::array<double, 3> RadialPotentialField::radial_jet(double r) const {
    const Rho p = rho(r, rs_);
    const double w1 = profile_->dW(p.value);
    return {profile_->W(p.value), w1 * p.d1, profile_->d2W(p.value) * p.d1 * p.d1 + w1 * p.d2};
}

double RadialPotentialField::potential(const Vec& x) const {
    return profile_->W(rho(x.norm(), rs_).value);
}

Vec RadialPotentialField::gradient(const Vec& x) const {
    const double r = x.norm();
    const Rho p = rho(r, rs_);
    const double f1_over_r =
        (rs_ > 0.0 && r < rs_) ? profile_->dW(p.value) * p.d1_over_r : profile_->dW_over_r(r);
    return f1_over_r * x;
}

Mat RadialPotentialField::hessian(const Vec& x) const {
    const auto n = x.size();
    const double r = x.norm();
    const Rho p = rho(r, rs_);
    const auto [f, f1, f2] = radial_jet(r);
    const double f1_over_r =
        (rs_ > 0.0 && r < rs_) ? profile_->dW(p.value) * p.d1_over_r : profile_->dW_over_r(r);
    if (r == 0.0) return f2 * Mat::Identity(n, n);
    const Vec u = x / r;
    const Mat uu = u * u.transpose();
    return f2 * uu + f1_over_r * (Mat::Identity(n, n) - uu);
}

MagneticBumpField::MagneticBumpField(std::shared_ptr<const FieldModel> base, double amplitude,
                                     double cutoff_radius)
    : FieldModel(base ? base->dimension() : 2), base_(std::move(base)), b0_(amplitude),
      rc_(cutoff_radius) {
    if (!base_) throw ValidationError("magnetic bump: missing base model");
    if (!(cutoff_radius > 0.0)) throw ValidationError("magnetic bump: cutoff radius must be positive");

    const double alpha = base_->bounds().alpha;
    const int n = dimension();
    std::array<double, 2> sup{};
    constexpr int radii = 200;
    const int dirs = n == 2 ? 64 : 512;
    for (int i = 0; i <= radii; ++i) {
        const double r = rc_ * i / radii;
        for (int j = 0; j < dirs; ++j) {
            const Vec x = r * direction(n, j);
            const double w = 1.0 + r;
            sup[0] = std::max(sup[0], std::pow(w, alpha + 1.0) * magnetic(x).cwiseAbs().maxCoeff());
            for (int l = 0; l < n; ++l)
                sup[1] = std::max(sup[1], std::pow(w, alpha + 2.0) *
                                              magnetic_derivative(x, l).cwiseAbs().maxCoeff());
            if (i == 0) break;
        }
    }
    // sampled sup of a compactly supported bump: leave a wider margin
    ShortRangeBounds b = base_->bounds();
    b.beta[1] = std::max(b.beta[1], 1.02 * sup[0]);
    b.beta[2] = std::max(b.beta[2], 1.02 * sup[1]);
    b.lambda = b.lambda + 1.02 * std::max(sup[0], sup[1]);
    b.validate();
    set_bounds(b);
}

Mat MagneticBumpField::magnetic(const Vec& x) const {
    const auto n = x.size();
    Mat B = Mat::Zero(n, n);
    const double rc2 = rc_ * rc_;
    const double s = x.squaredNorm();
    if (s >= rc2) return B;
    const double u = 1.0 - s / rc2;
    const double psi = u * u * u * u;
    const double dpsi = -4.0 * u * u * u / rc2;
    Vec a = Vec::Zero(n);
    a(0) = -x(1);
    a(1) = x(0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = i + 1; k < n; ++k) {
            double v = 2.0 * dpsi * (x(i) * a(k) - x(k) * a(i));
            if (i == 0 && k == 1) v += 2.0 * psi;
            B(i, k) = 0.5 * b0_ * v;
            B(k, i) = -B(i, k);
        }
    return B;
}

Mat MagneticBumpField::magnetic_derivative(const Vec& x, int l) const {
    const auto n = x.size();
    Mat D = Mat::Zero(n, n);
    const double rc2 = rc_ * rc_;
    const double s = x.squaredNorm();
    if (s >= rc2) return D;
    const double u = 1.0 - s / rc2;
    const double dpsi = -4.0 * u * u * u / rc2;
    const double d2psi = 12.0 * u * u / (rc2 * rc2);
    Vec a = Vec::Zero(n);
    a(0) = -x(1);
    a(1) = x(0);
    // J(i,k) = d a_k / d x_i
    auto J = [](Eigen::Index i, Eigen::Index k) {
        if (i == 0 && k == 1) return 1.0;
        if (i == 1 && k == 0) return -1.0;
        return 0.0;
    };
    auto delta = [](Eigen::Index i, Eigen::Index k) { return i == k ? 1.0 : 0.0; };
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = i + 1; k < n; ++k) {
            double v = 4.0 * d2psi * x(l) * (x(i) * a(k) - x(k) * a(i)) +
                       2.0 * dpsi * (delta(l, i) * a(k) + x(i) * J(l, k) - delta(l, k) * a(i) -
                                     x(k) * J(l, i));
            if (i == 0 && k == 1) v += 4.0 * dpsi * x(l);
            D(i, k) = 0.5 * b0_ * v;
            D(k, i) = -D(i, k);
        }
    return D;
}

std::optional<double> MagneticBumpField::radial_radius() const {
    const auto r = base_->radial_radius();
    if (!r) return std::nullopt;
    return std::max(*r, rc_);
}

// ------------------------------------------------------------- operations

Vec eval_force(const FieldModel& model, const Vec& x, const Vec& v, double coupling) {
    require_finite(x, "position");
    require_finite(v, "velocity");
    Vec f = -model.gradient(x);
    if (model.has_magnetic()) f += coupling * (model.magnetic(x) * v);
    return f;
}

SampleSpec SampleSpec::doubled() const {
    SampleSpec s = *this;
    s.radial_intervals *= 2;
    s.directions *= 2;
    return s;
}

std::vector<Vec> point_cloud(int dimension, const SampleSpec& spec) {
    if (spec.radial_intervals < 1 || spec.directions < 1 || !(spec.r_max > spec.r_min_positive) ||
        !(spec.r_min_positive > 0.0))
        throw ValidationError("point cloud: empty or malformed sample specification");
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(spec.directions));
    for (int j = 0; j < spec.directions; ++j) dirs.push_back(direction(dimension, j));

    std::vector<Vec> pts;
    pts.push_back(Vec::Zero(dimension));
    const double lo = std::log(spec.r_min_positive), hi = std::log(spec.r_max);
    for (int i = 0; i <= spec.radial_intervals; ++i) {
        const double r = std::exp(lo + (hi - lo) * i / spec.radial_intervals);
        for (const Vec& d : dirs) pts.push_back(r * d);
    }
    return pts;
}

double shortrange_norm(const FieldModel& model, const SampleSpec& spec) {
    const auto pts = point_cloud(model.dimension(), spec);
    const double alpha = model.bounds().alpha;
    double supV = 0.0, supB = 0.0;
    for (const Vec& x : pts) {
        const double w = 1.0 + x.norm();
        supV = std::max(supV, std::pow(w, alpha) * std::abs(model.potential(x)));
        supV = std::max(supV, std::pow(w, alpha + 1.0) * model.gradient(x).cwiseAbs().maxCoeff());
        supV = std::max(supV, std::pow(w, alpha + 2.0) * model.hessian(x).cwiseAbs().maxCoeff());
        if (model.has_magnetic()) {
            supB = std::max(supB, std::pow(w, alpha + 1.0) * model.magnetic(x).cwiseAbs().maxCoeff());
            for (int l = 0; l < model.dimension(); ++l)
                supB = std::max(supB, std::pow(w, alpha + 2.0) *
                                          model.magnetic_derivative(x, l).cwiseAbs().maxCoeff());
        }
    }
    return supV + supB;
}

ClosednessReport check_closedness(const FieldModel& model, const std::vector<Vec>& points,
                                  double h) {
    if (!(h > 0.0)) throw ValidationError("check_closedness: step must be positive");
    ClosednessReport rep;
    const int n = model.dimension();
    for (const Vec& x : points) {
        std::vector<Mat> dB(static_cast<std::size_t>(n));
        for (int l = 0; l < n; ++l) {
            Vec xp = x, xm = x;
            xp(l) += h;
            xm(l) -= h;
            dB[static_cast<std::size_t>(l)] = (model.magnetic(xp) - model.magnetic(xm)) / (2.0 * h);
            if (!dB[static_cast<std::size_t>(l)].allFinite())
                throw NumericalError("check_closedness: non-finite magnetic field evaluation");
        }
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    const double res = std::abs(dB[static_cast<std::size_t>(l)](i, k) +
                                                dB[static_cast<std::size_t>(k)](l, i) +
                                                dB[static_cast<std::size_t>(i)](k, l));
                    if (res > rep.max_residual) {
                        rep.max_residual = res;
                        rep.worst_point = x;
                    }
                }
    }
    return rep;
}

bool BoundsAudit::passed() const {
    for (double r : potential_ratio)
        if (r > 1.0) return false;
    for (double r : magnetic_ratio)
        if (r > 1.0) return false;
    return max_antisymmetry_defect <= 1e-14;
}

BoundsAudit audit_bounds(const FieldModel& model, const std::vector<Vec>& points) {
    const auto& b = model.bounds();
    BoundsAudit a;
    for (const Vec& x : points) {
        const double w = 1.0 + x.norm();
        a.potential_ratio[0] = std::max(a.potential_ratio[0],
                                        std::pow(w, b.alpha) * std::abs(model.potential(x)) / b.beta[0]);
        a.potential_ratio[1] =
            std::max(a.potential_ratio[1],
                     std::pow(w, b.alpha + 1) * model.gradient(x).cwiseAbs().maxCoeff() / b.beta[1]);
        a.potential_ratio[2] =
            std::max(a.potential_ratio[2],
                     std::pow(w, b.alpha + 2) * model.hessian(x).cwiseAbs().maxCoeff() / b.beta[2]);
        const Mat B = model.magnetic(x);
        a.max_antisymmetry_defect = std::max(a.max_antisymmetry_defect, (B + B.transpose()).cwiseAbs().maxCoeff());
        a.magnetic_ratio[0] = std::max(a.magnetic_ratio[0],
                                       std::pow(w, b.alpha + 1) * B.cwiseAbs().maxCoeff() / b.beta[1]);
        for (int l = 0; l < model.dimension(); ++l)
            a.magnetic_ratio[1] =
                std::max(a.magnetic_ratio[1], std::pow(w, b.alpha + 2) *
                                                  model.magnetic_derivative(x, l).cwiseAbs().maxCoeff() /
                                                  b.beta[2]);
    }
    return a;
}

}  // namespace invscat
