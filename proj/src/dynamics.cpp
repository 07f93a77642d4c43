#include "invscat/dynamics.hpp"

#include "invscat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invscat {

// ------------------------------------------------------------ EnergyContext

EnergyContext EnergyContext::nonrelativistic(double E) {
    EnergyContext c;
    c.regime = Regime::nonrelativistic;
    c.E = E;
    c.validate();
    return c;
}

EnergyContext EnergyContext::relativistic(double E, double light_speed) {
    EnergyContext c;
    c.regime = Regime::relativistic;
    c.E = E;
    c.c = light_speed;
    c.validate();
    return c;
}

void EnergyContext::validate() const {
    if (!std::isfinite(E)) throw ValidationError("energy must be finite");
    if (regime == Regime::nonrelativistic) {
        if (!(E > 0.0)) throw ValidationError("nonrelativistic energy must be positive");
        return;
    }
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("light speed c must be positive and finite");
    if (!(E > c * c)) throw ValidationError("relativistic energy must exceed c^2");
}

double EnergyContext::speed_at(double V) const {
    const double K = E - V;
    if (regime == Regime::nonrelativistic) {
        if (!(K > 0.0)) throw NumericalError("classically forbidden point: E - V <= 0");
        return std::sqrt(2.0 * K);
    }
    const double c2 = c * c;
    if (!(K > c2)) throw NumericalError("classically forbidden point: E - V <= c^2");
    return c * std::sqrt((K - c2) * (K + c2)) / K;
}

double EnergyContext::speed_at_infinity() const { return speed_at(0.0); }

double EnergyContext::coupling() const {
    return regime == Regime::nonrelativistic ? 1.0 : 1.0 / c;
}

Vec EnergyContext::momentum(const Vec& v) const {
    if (regime == Regime::nonrelativistic) return v;
    const double b2 = v.squaredNorm() / (c * c);
    if (!(b2 < 1.0)) throw ValidationError("relativistic velocity must satisfy |v| < c");
    return v / std::sqrt(1.0 - b2);
}

Vec EnergyContext::velocity(const Vec& p) const {
    if (regime == Regime::nonrelativistic) return p;
    return p / std::sqrt(1.0 + p.squaredNorm() / (c * c));
}

double EnergyContext::energy(const FieldModel& model, const Vec& x, const Vec& v) const {
    const double V = model.potential(x);
    if (regime == Regime::nonrelativistic) return 0.5 * v.squaredNorm() + V;
    const Vec p = momentum(v);
    return c * c * std::sqrt(1.0 + p.squaredNorm() / (c * c)) + V;
}

namespace {

double energy_of_state(const EnergyContext& ctx, const FieldModel& model, const Vec& y, int n) {
    const Vec x = y.head(n);
    const Vec w = y.tail(n);
    const double V = model.potential(x);
    if (!ctx.relativistic_regime()) return 0.5 * w.squaredNorm() + V;
    return ctx.c * ctx.c * std::sqrt(1.0 + w.squaredNorm() / (ctx.c * ctx.c)) + V;
}

double energy_scale(const EnergyContext& ctx) {
    return ctx.relativistic_regime() ? ctx.E - ctx.c * ctx.c : std::abs(ctx.E);
}

// dv/dp = (1/gamma)(I - v v^T / c^2)
Vec apply_velocity_jacobian(const EnergyContext& ctx, const Vec& v, const Vec& w) {
    if (!ctx.relativistic_regime()) return w;
    const double c2 = ctx.c * ctx.c;
    const double inv_gamma = std::sqrt(1.0 - v.squaredNorm() / c2);
    return inv_gamma * (w - v * (v.dot(w) / c2));
}

ode::Rhs make_rhs(const FieldModel& model, const EnergyContext& ctx, int n) {
    const double k = ctx.coupling();
    if (!ctx.relativistic_regime()) {
        return [&model, n, k](double, const Vec& y, Vec& dy) {
            const Vec x = y.head(n);
            const Vec v = y.tail(n);
            dy.head(n) = v;
            Vec f = -model.gradient(x);
            if (model.has_magnetic()) f += k * (model.magnetic(x) * v);
            dy.tail(n) = f;
        };
    }
    const double c2 = ctx.c * ctx.c;
    return [&model, n, k, c2](double, const Vec& y, Vec& dy) {
        const Vec x = y.head(n);
        const Vec p = y.tail(n);
        const Vec v = p / std::sqrt(1.0 + p.squaredNorm() / c2);
        dy.head(n) = v;
        Vec f = -model.gradient(x);
        if (model.has_magnetic()) f += k * (model.magnetic(x) * v);
        dy.tail(n) = f;
    };
}

struct TailIntegrals {
    Vec impulse;   // int_0^inf F(u) du
    Vec moment;    // int_0^inf u J F(u) du
};

// First-order (Born) tail integrals along the free line x0 + sgn u v for u >= 0.
TailIntegrals tail_integrals(const FieldModel& model, const EnergyContext& ctx, const Vec& x0,
                             const Vec& v, double sgn, double scale, double rel_tol) {
    const auto n = x0.size();
    TailIntegrals out{Vec::Zero(n), Vec::Zero(n)};
    const double k = ctx.coupling();
    auto force = [&](double u) {
        const Vec x = x0 + (sgn * u) * v;
        Vec f = -model.gradient(x);
        if (model.has_magnetic()) f += k * (model.magnetic(x) * v);
        return f;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        out.impulse(i) =
            quad::integrate_half_line([&](double u) { return force(u)(i); }, scale, rel_tol).value;
        out.moment(i) = quad::integrate_half_line(
                            [&](double u) { return u * apply_velocity_jacobian(ctx, v, force(u))(i); },
                            scale, rel_tol)
                            .value;
    }
    return out;
}

Vec rescale_to_energy(const EnergyContext& ctx, const FieldModel& model, const Vec& x, const Vec& v) {
    const double s = ctx.speed_at(model.potential(x));
    const double nv = v.norm();
    if (nv == 0.0) throw NumericalError("cannot rescale a zero velocity to the energy shell");
    return v * (s / nv);
}

}  // namespace

// ------------------------------------------------------------- constants

NontrappingReport nontrapping_constants(const EnergyContext& ctx, const ShortRangeBounds& b,
                                        int n) {
    ctx.validate();
    b.validate();
    const double E = ctx.E;
    const double b0 = b.beta[0], b1 = b.beta[1];
    NontrappingReport r;
    if (!ctx.relativistic_regime()) {
        r.C_E = 2.0 * E / ((n * b1 + 2.0 * b0) * (1.0 + std::sqrt(2.0 * (E + b0))));
        r.escape_coefficient = E;
    } else {
        const double c2 = ctx.c * ctx.c;
        const double x = (E - c2) / c2;
        const double num = c2 * ((x / 4.0 + 1.0) * (x / 4.0 + 1.0) - 1.0);
        const double den = (1.5 * x + 1.0) * (1.5 * x + 1.0);
        r.rel_term_energy = (E - c2) / (2.0 * b0);
        r.rel_term_force = num / (4.0 * b1 * n * den);
        r.C_E = std::min(r.rel_term_energy, r.rel_term_force);
        r.escape_coefficient = 0.5 * num / den;
    }
    r.R_E = std::max(0.0, std::pow(2.0 / r.C_E, 1.0 / b.alpha) - 1.0);
    return r;
}

std::optional<double> energy_threshold_E1(Regime regime, double c, const ShortRangeBounds& bounds,
                                          int n, double R) {
    if (!(R >= 0.0)) throw ValidationError("energy threshold: R must be nonnegative");
    const double need = 2.0 * std::pow(1.0 + R, -bounds.alpha);
    auto ctx_at = [&](double E) {
        return regime == Regime::nonrelativistic ? EnergyContext::nonrelativistic(E)
                                                 : EnergyContext::relativistic(E, c);
    };
    auto ok = [&](double E) { return nontrapping_constants(ctx_at(E), bounds, n).C_E >= need; };

    double lo, hi;
    if (regime == Regime::nonrelativistic) {
        lo = 0.0;
        hi = 1.0;
    } else {
        const double c2 = c * c;
        const double limit = c2 / (144.0 * bounds.beta[1] * n);
        if (!(limit > need)) return std::nullopt;
        lo = c2;
        hi = 2.0 * c2;
    }
    for (int i = 0; i < 200 && !ok(hi); ++i) {
        lo = hi;
        hi *= 2.0;
    }
    if (!ok(hi)) return std::nullopt;
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

// ------------------------------------------------------------ Trajectory

Trajectory::Trajectory(EnergyContext ctx, int n, ode::Solution sol, double tol,
                       const FieldModel& model)
    : ctx_(ctx), n_(n), dense_(std::move(sol.dense)), stats_(sol.stats), tol_(tol) {
    const double scale = energy_scale(ctx_);
    energy_residual_.reserve(dense_.states().size());
    for (const Vec& y : dense_.states()) {
        const double r = (energy_of_state(ctx_, model, y, n_) - ctx_.E) / scale;
        energy_residual_.push_back(r);
        max_drift_ = std::max(max_drift_, std::abs(r));
    }
    drift_flagged_ = max_drift_ > 100.0 * tol_;
}

Vec Trajectory::position(double t) const { return dense_(t).head(n_); }

Vec Trajectory::velocity(double t) const { return ctx_.velocity(dense_(t).tail(n_)); }

Trajectory integrate(const FieldModel& model, const EnergyContext& ctx, const Vec& x0,
                     const Vec& v0, double t0, double t1, double tol, const StepObserver& observer) {
    ctx.validate();
    const int n = model.dimension();
    if (x0.size() != n || v0.size() != n) throw ValidationError("integrate: state dimension mismatch");
    if (!x0.allFinite() || !v0.allFinite()) throw ValidationError("integrate: non-finite initial state");
    if (!(tol > 0.0)) throw ValidationError("integrate: tolerance must be positive");
    if (ctx.relativistic_regime() && !(v0.norm() < ctx.c))
        throw ValidationError("integrate: relativistic initial speed must be below c");

    const double e0 = ctx.energy(model, x0, v0);
    if (std::abs(e0 - ctx.E) > 1e-12 * std::max(1.0, std::abs(ctx.E))) {
        std::ostringstream os;
        os.precision(17);
        os << "integrate: initial energy " << e0 << " differs from E = " << ctx.E;
        throw ValidationError(os.str());
    }

    Vec y0(2 * n);
    y0 << x0, ctx.momentum(v0);
    ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    // a step never covers more than a quarter of the distance to the core
    const double core = std::max({1.0, model.radial_radius().value_or(1.0)});
    opt.step_limit = [n, core, &ctx](double, const Vec& y) {
        const double sp = ctx.velocity(y.tail(n)).norm();
        return 0.25 * (y.head(n).norm() + core) / std::max(sp, 1e-300);
    };
    ode::Observer obs;
    if (observer) {
        obs = [&](double t, const Vec& y, double& t_end) {
            return observer(t, y.head(n), ctx.velocity(y.tail(n)), t_end);
        };
    }
    auto sol = ode::dopri5(make_rhs(model, ctx, n), t0, y0, t1, opt, obs);
    return Trajectory(ctx, n, std::move(sol), tol, model);
}

// -------------------------------------------------------------- shooting

double shooting_start_time(const EnergyContext& ctx, const ShortRangeBounds& b, int n,
                           double speed, double x_minus_norm, const ShootOptions& opt) {
    ctx.validate();
    const double floor_t = 4.0 * (x_minus_norm + 1.0) / speed;
    if (opt.t0_override > 0.0) return opt.t0_override;
    if (!(opt.tol > 0.0)) throw ValidationError("shooting: tolerance must be positive");
    // n beta1 (1 + |v||t0|/2)^(-alpha) (1+|v|) / ((alpha-1)|v|) <= tol/10
    const double K = 10.0 * n * b.beta[1] * (1.0 + speed) / ((b.alpha - 1.0) * speed * opt.tol);
    const double t = std::max(floor_t, 2.0 * (std::pow(K, 1.0 / b.alpha) - 1.0) / speed);
    if (t > opt.t0_cap) {
        std::ostringstream os;
        os << "shooting: |t0| = " << t << " needed for tol " << opt.tol << " exceeds the cap "
           << opt.t0_cap << " (decay exponent alpha = " << b.alpha << ")";
        throw NumericalError(os.str());
    }
    return t;
}

Trajectory shoot_from_minus_infinity(const FieldModel& model, const EnergyContext& ctx,
                                     const Vec& v_minus, const Vec& x_minus, double t_end,
                                     const ShootOptions& opt, AsymptoteData* incoming,
                                     const StepObserver& observer) {
    ctx.validate();
    const int n = model.dimension();
    if (v_minus.size() != n || x_minus.size() != n)
        throw ValidationError("shoot: asymptote dimension mismatch");
    const double speed = ctx.speed_at_infinity();
    if (std::abs(v_minus.norm() - speed) > 1e-10 * speed) {
        std::ostringstream os;
        os.precision(17);
        os << "shoot: |v_minus| = " << v_minus.norm() << " must equal the speed at infinity " << speed;
        throw ValidationError(os.str());
    }
    const double T0 = shooting_start_time(ctx, model.bounds(), n, speed, x_minus.norm(), opt);
    const double t0 = -T0;
    if (!(t_end > t0)) throw ValidationError("shoot: t_end must exceed the start time");

    const Vec line = x_minus + t0 * v_minus;
    const auto tail = tail_integrals(model, ctx, line, v_minus, -1.0, T0, 1e-8);
    const Vec y = tail.moment;
    Vec x0 = line + y;
    Vec v0 = v_minus + apply_velocity_jacobian(ctx, v_minus, tail.impulse);
    v0 = rescale_to_energy(ctx, model, x0, v0);

    if (incoming) {
        incoming->v_minus = v_minus;
        incoming->x_minus = x_minus;
        incoming->residual_minus = y.norm() + (v0 - v_minus).norm();
    }
    return integrate(model, ctx, x0, v0, t0, t_end, opt.ode_tol, observer);
}

AsymptoteData fit_outgoing_asymptote(const FieldModel& model, const Trajectory& traj,
                                     double tail_window, double tol) {
    const EnergyContext& ctx = traj.context();
    const int n = traj.dimension();
    const double T = traj.t_end();
    const auto nt = nontrapping_constants(ctx, model.bounds(), n);
    const Vec xT = traj.position(T);
    const Vec vT = traj.velocity(T);
    if (xT.norm() < nt.R_E || xT.dot(vT) <= 0.0) {
        std::ostringstream os;
        os << "fit_outgoing_asymptote: trajectory has not escaped (|x| = " << xT.norm()
           << ", R_E = " << nt.R_E << ", x.v = " << xT.dot(vT) << "); possibly trapped";
        throw NumericalError(os.str());
    }
    const double window = std::clamp(tail_window, 0.0, T - traj.t_begin());
    const double speed = vT.norm();

    auto outgoing_velocity = [&](const Vec& x, const Vec& v, TailIntegrals& ti) {
        ti = tail_integrals(model, ctx, x, v, 1.0, std::max(1.0, x.norm() / speed), tol);
        if (!ctx.relativistic_regime()) return Vec(v + ti.impulse);
        return ctx.velocity(ctx.momentum(v) + ti.impulse);
    };

    AsymptoteData a;
    TailIntegrals ti;
    a.v_plus = outgoing_velocity(xT, vT, ti);

    constexpr int m = 8;
    std::vector<Vec> est;
    double vspread = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = T - 0.5 * window * (m - 1 - k) / (m - 1);
        const Vec x = traj.position(t);
        const Vec v = traj.velocity(t);
        TailIntegrals tk;
        const Vec vp = outgoing_velocity(x, v, tk);
        vspread = std::max(vspread, (vp - a.v_plus).norm());
        est.push_back(x - t * a.v_plus - tk.moment);
    }
    a.x_plus = Vec::Zero(n);
    for (const Vec& e : est) a.x_plus += e;
    a.x_plus /= m;
    double xspread = 0.0;
    for (const Vec& e : est) xspread = std::max(xspread, (e - a.x_plus).norm());
    a.residual_plus = xspread + vspread;
    return a;
}

ScatteringRun scattering_map(const FieldModel& model, const EnergyContext& ctx, const Vec& v_minus,
                             const Vec& x_minus, const ShootOptions& opt) {
    ctx.validate();
    const int n = model.dimension();
    ScatteringRun run;
    run.nontrapping = nontrapping_constants(ctx, model.bounds(), n);
    const double RE = run.nontrapping.R_E;
    const double speed = ctx.speed_at_infinity();
    const double T0 = shooting_start_time(ctx, model.bounds(), n, speed, x_minus.norm(), opt);
    const double budget = 2.0 * T0 + 1e4 * std::max({RE, x_minus.norm(), 1.0}) / speed;
    const double window = std::max(10.0 * RE / speed, T0);

    bool escaped = false;
    double t_escape = 0.0;
    StepObserver obs = [&](double t, const Vec& x, const Vec& v, double& t_end) {
        if (!escaped && x.norm() >= RE && x.dot(v) > 0.0) {
            escaped = true;
            t_escape = t;
            t_end = t + window;
        }
        return true;
    };
    run.trajectory =
        shoot_from_minus_infinity(model, ctx, v_minus, x_minus, -T0 + budget, opt, &run.asymptotes, obs);
    run.t_start = -T0;
    if (!escaped) {
        std::ostringstream os;
        os << "scattering_map: no escape within the time budget " << budget
           << " (R_E = " << RE << "); trapped or budget exceeded";
        throw NumericalError(os.str());
    }
    run.t_escape = t_escape;
    const auto out = fit_outgoing_asymptote(model, run.trajectory, window);
    run.asymptotes.v_plus = out.v_plus;
    run.asymptotes.x_plus = out.x_plus;
    run.asymptotes.residual_plus = out.residual_plus;
    return run;
}

// ------------------------------------------------------------ escape check

EscapeCheck check_escape(const FieldModel& model, const Trajectory& traj,
                         const NontrappingReport& report, int samples) {
    EscapeCheck chk;
    const double RE = report.R_E;
    const auto& ts = traj.dense().times();
    auto g = [&](double t) { return traj.position(t).norm() - RE; };

    // last outward crossing
    std::size_t k = ts.size();
    for (std::size_t i = ts.size() - 1; i > 0; --i) {
        if (g(ts[i - 1]) < 0.0 && g(ts[i]) >= 0.0) {
            k = i;
            break;
        }
    }
    if (k == ts.size()) return chk;  // never inside the ball
    double lo = ts[k - 1], hi = ts[k];
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    chk.T = hi;

    const EnergyContext& ctx = traj.context();
    const double kq = report.escape_coefficient;
    const double span = traj.t_end() - chk.T;
    for (int i = 1; i <= samples; ++i) {
        // half geometric, half uniform in t - T
        const double frac = i <= samples / 2 ? std::pow(10.0, -4.0 * (1.0 - 2.0 * i / double(samples)))
                                             : double(i) / samples;
        const double dt = span * frac;
        const Vec x = traj.position(chk.T + dt);
        const double ratio = (x.squaredNorm() - RE * RE) / (kq * dt * dt);
        chk.worst_ratio = std::min(chk.worst_ratio, ratio);
        ++chk.samples;
    }
    const double cpl = ctx.coupling();
    for (double t : ts) {
        const Vec x = traj.position(t);
        if (x.norm() < RE) continue;
        const Vec v = traj.velocity(t);
        Vec f = -model.gradient(x);
        if (model.has_magnetic()) f += cpl * (model.magnetic(x) * v);
        const Vec a = apply_velocity_jacobian(ctx, v, f);
        chk.min_I_ddot = std::min(chk.min_I_ddot, v.squaredNorm() + x.dot(a));
    }
    return chk;
}

}  // namespace invscat
