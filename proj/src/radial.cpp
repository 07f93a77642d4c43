#include "invscat/radial.hpp"

#include "invscat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invscat {

namespace {

constexpr double pi = std::numbers::pi;

double e2_minus_c4(const EnergyContext& ctx, double E) {
    const double c2 = ctx.c * ctx.c;
    return (E - c2) * (E + c2);
}

}  // namespace

double compute_beta(const EnergyContext& ctx, const ProfileBounds& b, double R) {
    ctx.validate();
    if (!(R >= 0.0)) throw ValidationError("compute_beta: R must be nonnegative");
    const double E = ctx.E;
    const double a = b.alpha;
    if (!ctx.relativistic_regime())
        return std::sqrt(2.0 * E + 2.0 * b.beta0) * std::max(R, std::pow((b.beta1 + 2.0 * b.beta0) / (2.0 * E), 1.0 / a));

    const double c = ctx.c;
    const double P = E * (2.0 * b.beta0 + b.beta1) + b.beta1 * b.beta0;
    const double D = e2_minus_c4(ctx, E);
    const double disc = P * P - 4.0 * b.beta0 * b.beta0 * D;
    if (disc < 0.0) {
        std::ostringstream os;
        os << "compute_beta: negative discriminant " << disc << "; energy too low for the relativistic threshold";
        throw ValidationError(os.str());
    }
    // (2 b0^2)^(1/a) (P - sqrt(disc))^(-1/a), rationalised to avoid cancellation
    const double tilde = std::pow((P + std::sqrt(disc)) / (2.0 * D), 1.0 / a);
    const double root = std::sqrt((E + b.beta0 - c * c) * (E + b.beta0 + c * c));
    const double second = std::pow(b.beta0 / (E - c * c), 1.0 / a) * c * root / E;
    const double third = c * R * root / E;
    return std::max({tilde, second, third});
}

double beta_prime_formula(const EnergyContext& ctx, const ProfileBounds& b, double beta) {
    const double E = ctx.E;
    const double a = b.alpha;
    if (!ctx.relativistic_regime()) {
        const double rad = 2.0 * E - 2.0 * b.beta0 * std::pow(beta, -a) * std::pow(2.0 * b.beta0 + 2.0 * E, a / 2.0);
        if (!(rad > 0.0)) throw ValidationError("beta': radicand is not positive; energy too low relative to the bounds");
        return beta / std::sqrt(rad);
    }
    const double c = ctx.c;
    const double c2 = c * c;
    const double lower = beta * E / (c * std::sqrt((E + b.beta0 - c2) * (E + b.beta0 + c2)));
    const double K = E - b.beta0 * std::pow(lower, -a);
    const double rad = (K - c2) * (K + c2);
    if (!(K > c2) || !(rad > 0.0))
        throw ValidationError("beta': radicand is not positive; energy too low relative to the bounds");
    return E * beta / (c * std::sqrt(rad));
}

RadialScatteringContext make_radial_context(const EnergyContext& ctx,
                                            std::shared_ptr<const RadialProfile> profile,
                                            double q_max_factor) {
    if (!profile) throw ValidationError("radial context: missing profile");
    if (!(q_max_factor > 1.0)) throw ValidationError("radial context: q_max factor must exceed 1");
    RadialScatteringContext rc;
    rc.ctx = ctx;
    rc.profile = std::move(profile);
    rc.bounds = rc.profile->bounds();
    rc.R = rc.profile->inner_radius();
    rc.beta = compute_beta(ctx, rc.bounds, rc.R);
    if (!(rc.beta > 0.0)) throw ValidationError("radial context: beta must be positive (use R > 0)");
    rc.beta_prime = beta_prime_formula(ctx, rc.bounds, rc.beta);
    rc.q_max = q_max_factor * rc.beta;
    return rc;
}

double perihelion_function(const RadialScatteringContext& rc, double q, double r) {
    const double W = rc.profile->W(r);
    const double E = rc.ctx.E;
    if (!rc.ctx.relativistic_regime()) return E - W - q * q / (2.0 * r * r);
    const double c = rc.ctx.c;
    const double K = E - W;
    return (K - c * c) * (K + c * c) - q * q * E * E / (c * c * r * r);
}

PerihelionBounds r_min_bounds(const RadialScatteringContext& rc, double q) {
    const double E = rc.ctx.E;
    const double b0 = rc.bounds.beta0;
    const double a = rc.bounds.alpha;
    PerihelionBounds pb;
    if (!rc.ctx.relativistic_regime()) {
        pb.lower = q / std::sqrt(2.0 * E + 2.0 * b0);
        const double rad = 2.0 * E - 2.0 * b0 * std::pow(q, -a) * std::pow(2.0 * b0 + 2.0 * E, a / 2.0);
        pb.upper = rad > 0.0 ? q / std::sqrt(rad) : std::numeric_limits<double>::infinity();
        return pb;
    }
    const double c = rc.ctx.c;
    const double c2 = c * c;
    pb.lower = q * E / (c * std::sqrt((E + b0 - c2) * (E + b0 + c2)));
    const double K = E - b0 * std::pow(pb.lower, -a);
    pb.upper = K > c2 ? E * q / (c * std::sqrt((K - c2) * (K + c2))) : std::numeric_limits<double>::infinity();
    return pb;
}

double r_min(const RadialScatteringContext& rc, double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("r_min: q must be positive");
    auto h = [&](double r) { return perihelion_function(rc, q, r); };
    const PerihelionBounds pb = r_min_bounds(rc, q);

    double top = std::isfinite(pb.upper) ? pb.upper * (1.0 + 1e-12) : 2.0 * pb.lower;
    for (int i = 0; i < 200 && h(top) <= 0.0; ++i) top *= 1.5;
    if (!(h(top) > 0.0)) throw NumericalError("r_min: no positive value of the radicand above the bounds");

    // march downward from the top with step halving until the sign changes
    const double floor_r = std::max(rc.R, 0.5 * pb.lower);
    double hi = top, lo = top;
    bool found = false;
    for (double step = (top - floor_r) / 16.0; step > 1e-15 * top && !found; step *= 0.5) {
        hi = top;
        for (double r = top - step; r > floor_r; r -= step) {
            if (h(r) <= 0.0) {
                lo = r;
                found = true;
                break;
            }
            hi = r;
        }
    }
    if (!found) {
        // the root can sit on the floor itself (free field at q = beta gives r_min = R)
        const double scale = rc.ctx.relativistic_regime() ? rc.ctx.E * rc.ctx.E : std::abs(rc.ctx.E);
        if (h(floor_r) <= 1e-14 * scale) {
            lo = floor_r;
            found = true;
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "r_min: no sign change in (" << floor_r << ", " << top << "] for q = " << q
           << "; q below beta or profile violates its bounds";
        throw NumericalError(os.str());
    }
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (h(mid) > 0.0 ? hi : lo) = mid;
    }
    double r = 0.5 * (lo + hi);
    // Newton polish, kept inside the bracket
    for (int i = 0; i < 2; ++i) {
        const double E = rc.ctx.E;
        const double W = rc.profile->W(r), dW = rc.profile->dW(r);
        double dh;
        if (!rc.ctx.relativistic_regime()) {
            dh = -dW + q * q / (r * r * r);
        } else {
            const double c = rc.ctx.c;
            dh = -2.0 * (E - W) * dW + 2.0 * q * q * E * E / (c * c * r * r * r);
        }
        if (!(dh != 0.0) || !std::isfinite(dh)) break;
        const double rn = r - h(r) / dh;
        if (!(rn >= lo && rn <= hi)) break;
        r = rn;
    }
    if (r < rc.R) {
        std::ostringstream os;
        os << "r_min: root " << r << " lies below R = " << rc.R << " (q = " << q << " below beta?)";
        throw NumericalError(os.str());
    }
    return r;
}

double r_min_derivative(const RadialScatteringContext& rc, double q) {
    const double r = r_min(rc, q);
    const double W = rc.profile->W(r);
    const double dW = rc.profile->dW(r);
    const double E = rc.ctx.E;
    double num, den;
    if (!rc.ctx.relativistic_regime()) {
        num = q * r;
        den = q * q - r * r * r * dW;
    } else {
        const double c2 = rc.ctx.c * rc.ctx.c;
        num = E * E * q * r;
        den = -c2 * (E - W) * r * r * r * dW + q * q * E * E;
    }
    if (!(den > 0.0)) {
        std::ostringstream os;
        os << "r_min_derivative: nonpositive denominator " << den << " at q = " << q;
        throw InvariantViolation(os.str());
    }
    return num / den;
}

double deflection_quadrature(const RadialScatteringContext& rc, double q, double rel_tol) {
    const double a = r_min(rc, q);  // = 1/chi
    const double chi = 1.0 / a;
    const double E = rc.ctx.E;
    const RadialProfile& P = *rc.profile;
    const double Wa = P.W(a);
    const bool rel = rc.ctx.relativistic_regime();
    const double c = rc.ctx.c;

    // W(1/chi) - W(1/s) for s = chi sin(theta), without cancellation near theta = pi/2
    auto delta = [&](double th, double& Ws) {
        const double sn = std::sin(th), cs = std::cos(th);
        if (sn <= 0.0) {
            Ws = 0.0;
            return Wa;
        }
        const double d = a * cs * cs / ((1.0 + sn) * sn);
        if (d < 1e-5 * a) {
            Ws = P.W(a + d);
            return -d * P.dW(a + 0.5 * d);
        }
        Ws = P.W(a + d);
        return Wa - Ws;
    };

    auto f = [&](double th) {
        const double cs = std::cos(th);
        double Ws = 0.0;
        const double dlt = delta(th, Ws);
        double rad;
        if (!rel) {
            rad = q * q * chi * chi * cs * cs + 2.0 * dlt;
        } else {
            rad = (E * E * q * q * chi * chi / (c * c)) * cs * cs + dlt * (2.0 * E - Ws - Wa);
        }
        if (!(rad > 0.0)) {
            std::ostringstream os;
            os << "deflection_quadrature: radicand " << rad << " <= 0 at theta = " << th << ", q = " << q;
            throw NumericalError(os.str());
        }
        return chi * cs / std::sqrt(rad);
    };
    const double I = quad::integrate(f, 0.0, 0.5 * pi, rel_tol).value;
    return rel ? 2.0 * I / c : 2.0 * I;
}

// ------------------------------------------------------------ ODE oracle

double swept_polar_angle(const Trajectory& traj, const AsymptoteData& a) {
    const int n = traj.dimension();
    const auto& ys = traj.dense().states();
    auto ang = [](const Vec& u, const Vec& w) { return std::atan2(wedge2(u, w), u.dot(w)); };
    const Vec in = -a.v_minus;
    double sum = ang(in, ys.front().head(n));
    for (std::size_t k = 1; k < ys.size(); ++k) sum += ang(ys[k - 1].head(n), ys[k].head(n));
    sum += ang(ys.back().head(n), a.v_plus);
    const double principal = ang(in, a.v_plus);
    return principal + 2.0 * pi * std::round((sum - principal) / (2.0 * pi));
}

DeflectionOdeResult deflection_ode(const RadialScatteringContext& rc, const FieldModel& model,
                                   double q, const ShootOptions& opt) {
    const int n = model.dimension();
    const EnergyContext& ctx = rc.ctx;
    const double sp = ctx.speed_at_infinity();
    Vec v = Vec::Zero(n), x = Vec::Zero(n);
    v(1) = sp;
    x(0) = q / sp;

    DeflectionOdeResult out;
    out.run = scattering_map(model, ctx, v, x, opt);
    const Trajectory& tr = out.run.trajectory;
    out.swept_angle = swept_polar_angle(tr, out.run.asymptotes);
    out.g = ctx.relativistic_regime() ? out.swept_angle / (ctx.E * q) : out.swept_angle / q;

    const double E = ctx.E;
    const double L = ctx.relativistic_regime() ? q * E / (ctx.c * ctx.c) : q;
    for (const Vec& y : tr.dense().states()) {
        const Vec xs = y.head(n);
        const Vec w = y.tail(n);  // v or p
        out.angular_momentum_residual = std::max(out.angular_momentum_residual, std::abs(wedge2(xs, w) - L) / L);
        const Vec vel = ctx.velocity(w);
        const double r = xs.norm();
        const double rdot = xs.dot(vel) / r;
        const double V = model.potential(xs);
        double res;
        if (!ctx.relativistic_regime()) {
            res = 2.0 * E - rdot * rdot - q * q / (r * r) - 2.0 * V;
        } else {
            const double c = ctx.c;
            const double K = E - V;
            res = 1.0 - rdot * rdot / (c * c) - c * c * c * c / (K * K) - q * q * E * E / (c * c * r * r * K * K);
        }
        out.radial_energy_residual = std::max(out.radial_energy_residual, std::abs(res));
    }

    // perihelion time: x.v changes sign from - to +
    const auto& ts = tr.dense().times();
    auto radial_rate = [&](double t) { return tr.position(t).dot(tr.velocity(t)); };
    for (std::size_t k = 1; k < ts.size(); ++k) {
        if (radial_rate(ts[k - 1]) < 0.0 && radial_rate(ts[k]) >= 0.0) {
            double lo = ts[k - 1], hi = ts[k];
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (radial_rate(mid) < 0.0 ? lo : hi) = mid;
            }
            const double tq = 0.5 * (lo + hi);
            const double span = std::min({20.0 * tr.position(tq).norm() / sp, tq - tr.t_begin(), tr.t_end() - tq});
            for (int i = 1; i <= 40; ++i) {
                const double s = span * i / 40.0;
                out.perihelion_asymmetry = std::max(
                    out.perihelion_asymmetry, std::abs(tr.position(tq + s).norm() - tr.position(tq - s).norm()));
            }
            break;
        }
    }
    return out;
}

// -------------------------------------------------------- DeflectionCurve

DeflectionCurve::DeflectionCurve(CurveMeta meta, std::vector<double> q, std::vector<double> g)
    : meta_(meta), q_(std::move(q)), g_(std::move(g)) {
    if (q_.size() < 2 || q_.size() != g_.size())
        throw ValidationError("deflection curve: need at least two (q, g) samples");
    if (!(meta_.alpha > 1.0)) throw ValidationError("deflection curve: alpha must exceed 1");
    if (meta_.regime == Regime::relativistic && !(meta_.E > meta_.c * meta_.c))
        throw ValidationError("deflection curve: relativistic energy must exceed c^2");
    std::vector<double> ell(q_.size()), th(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (!(q_[i] > 0.0) || !std::isfinite(q_[i])) throw ValidationError("deflection curve: q must be positive");
        if (i > 0 && !(q_[i] > q_[i - 1])) throw ValidationError("deflection curve: q must be strictly increasing");
        if (!(g_[i] > 0.0) || !std::isfinite(g_[i]))
            throw ValidationError("deflection curve: g must be positive and finite");
        ell[i] = std::log(q_[i]);
        th[i] = q_[i] * g_[i];
    }
    theta_ = MonotoneCubic(ell, th);

    // tail over the last decade: theta/theta_inf - 1 = a u^alpha + b u^(alpha+1),
    // u = q_max/q. The second term carries the leading correction to the
    // power law (it matters at the 1e-4 level for q_max ~ 100 beta). The fit
    // passes through the last sample, so theta stays continuous at q_max.
    const double Tinf = theta_infinity();
    const double y_last = th.back() / Tinf - 1.0;
    double suu = 0.0, suy = 0.0;
    std::size_t used = 0;
    for (std::size_t i = q_.size() - 1; i-- > 0;) {
        if (q_[i] < q_.back() / 10.0 && used >= 2) break;
        const double u1 = std::pow(q_.back() / q_[i], meta_.alpha);
        const double w = u1 * (q_.back() / q_[i] - 1.0);
        const double y = th[i] / Tinf - 1.0 - y_last * u1;
        suu += w * w;
        suy += w * y;
        ++used;
    }
    b_ = suu > 0.0 ? suy / suu : 0.0;
    a_ = y_last - b_;
}

double DeflectionCurve::tail_coefficient() const { return a_ * std::pow(q_.back(), meta_.alpha); }

double DeflectionCurve::tail_relative(double q) const {
    const double u = q_.back() / q;
    return std::pow(u, meta_.alpha) * (a_ + b_ * u);
}

double DeflectionCurve::tail_relative_log_derivative(double q) const {
    const double u = q_.back() / q;
    return -std::pow(u, meta_.alpha) * (meta_.alpha * a_ + (meta_.alpha + 1.0) * b_ * u);
}

double DeflectionCurve::theta_infinity() const {
    return meta_.regime == Regime::relativistic ? pi / meta_.E : pi;
}

void DeflectionCurve::check_q(double q) const {
    if (!(q >= q_.front() * (1.0 - 1e-12))) {
        std::ostringstream os;
        os.precision(17);
        os << "deflection curve covers [" << q_.front() << ", " << q_.back() << "]; q = " << q << " is below it";
        throw ValidationError(os.str());
    }
}

void DeflectionCurve::require_coverage(double lo, double hi) const {
    if (lo < q_.front() * (1.0 - 1e-12) || hi > q_.back() * (1.0 + 1e-12)) {
        std::ostringstream os;
        os.precision(17);
        os << "deflection curve covers [" << q_.front() << ", " << q_.back() << "] but the required range is ["
           << lo << ", " << hi << "]";
        throw ValidationError(os.str());
    }
}

double DeflectionCurve::theta(double q) const {
    check_q(q);
    if (q > q_.back()) return theta_infinity() * (1.0 + tail_relative(q));
    return theta_(std::log(std::max(q, q_.front())));
}

double DeflectionCurve::theta_log_derivative(double q) const {
    check_q(q);
    if (q > q_.back()) return theta_infinity() * tail_relative_log_derivative(q);
    return theta_.derivative(std::log(std::max(q, q_.front())));
}

double DeflectionCurve::g(double q) const { return theta(q) / q; }

double DeflectionCurve::dg(double q) const { return (theta_log_derivative(q) - theta(q)) / (q * q); }

std::vector<double> log_grid(double lo, const DeflectionGrid& grid) {
    if (!(lo > 0.0) || grid.points_per_decade < 1 || !(grid.decades > 0.0))
        throw ValidationError("deflection grid: need q_lo > 0, points per decade >= 1, decades > 0");
    const int m = static_cast<int>(std::lround(grid.points_per_decade * grid.decades));
    std::vector<double> q(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) q[static_cast<std::size_t>(k)] = lo * std::pow(10.0, double(k) / grid.points_per_decade);
    q.front() = lo;
    return q;
}

CurveMeta curve_meta(const RadialScatteringContext& rc) {
    return {rc.ctx.regime, rc.ctx.E, rc.ctx.c, rc.beta, rc.bounds.alpha};
}

DeflectionCurve sample_deflection(const RadialScatteringContext& rc, const DeflectionGrid& grid, double rel_tol) {
    const auto q = log_grid(rc.beta, grid);
    std::vector<double> g(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        g[i] = deflection_quadrature(rc, q[i], rel_tol);
        if (!std::isfinite(g[i])) throw NumericalError("sample_deflection: non-finite sample");
    }
    return DeflectionCurve(curve_meta(rc), q, g);
}

double nonrelativistic_limit_gap(const RadialScatteringContext& rel, double b_lo, double b_hi, int points) {
    if (!rel.ctx.relativistic_regime()) throw ValidationError("limit gap: needs a relativistic context");
    if (!(b_lo > 0.0) || !(b_hi > b_lo) || points < 2) throw ValidationError("limit gap: need 0 < b_lo < b_hi");
    const double c2 = rel.ctx.c * rel.ctx.c;
    const auto nr = make_radial_context(EnergyContext::nonrelativistic(rel.ctx.E - c2), rel.profile);
    const double sr = rel.ctx.speed_at_infinity(), sn = nr.ctx.speed_at_infinity();
    if (b_lo * sr < rel.beta || b_lo * sn < nr.beta) {
        std::ostringstream os;
        os.precision(17);
        os << "limit gap: b_lo = " << b_lo << " is below max(beta_rel/|v_rel|, beta/|v|) = "
           << std::max(rel.beta / sr, nr.beta / sn);
        throw ValidationError(os.str());
    }
    double gap = 0.0;
    for (int k = 0; k < points; ++k) {
        const double b = b_lo * std::pow(b_hi / b_lo, double(k) / (points - 1));
        const double qr = b * sr, qn = b * sn;
        const double tr = rel.ctx.E * qr * deflection_quadrature(rel, qr);
        const double tn = qn * deflection_quadrature(nr, qn);
        gap = std::max(gap, std::abs(tr - tn));
    }
    return gap;
}

}  // namespace invscat
