#include "invscat/scatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invscat {

namespace {

constexpr double pi = std::numbers::pi;

double energy_scale(const EnergyContext& ctx) {
    return ctx.relativistic_regime() ? ctx.E - ctx.c * ctx.c : std::abs(ctx.E);
}

struct Crossing {
    double t;
    bool inward;
};

}  // namespace

std::optional<BoundaryDatum> extract_boundary_data(const FieldModel& model, const EnergyContext& ctx,
                                                   const Vec& v_minus, const Vec& x_minus, double R,
                                                   const ShootOptions& opt) {
    if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("boundary data: R must be positive and finite");
    const auto rr = model.radial_radius();
    if (!rr) throw ValidationError("boundary data: the model has no radius beyond which it is radial");
    if (R < *rr * (1.0 - 1e-12)) {
        std::ostringstream os;
        os.precision(17);
        os << "boundary data: R = " << R << " is inside the interaction radius " << *rr;
        throw ValidationError(os.str());
    }
    const int n = model.dimension();
    const NontrappingReport nt = nontrapping_constants(ctx, model.bounds(), n);
    if (nt.R_E > R) {
        std::ostringstream os;
        os.precision(17);
        os << "energy below admissible threshold: R_E = " << nt.R_E << " exceeds R = " << R
           << " (C_E = " << nt.C_E << ")";
        throw ValidationError(os.str());
    }

    const ScatteringRun run = scattering_map(model, ctx, v_minus, x_minus, opt);
    const Trajectory& tr = run.trajectory;
    auto f = [&](double t) { return tr.position(t).squaredNorm() - R * R; };

    // sub-sample each step: the step limit keeps steps short near the core,
    // but a chord of one step could still dip under the sphere and come back
    std::vector<Crossing> cross;
    const auto& ts = tr.dense().times();
    double ta = ts.front(), fa = f(ta);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        for (int j = 1; j <= 4; ++j) {
            const double tb = ts[k - 1] + (ts[k] - ts[k - 1]) * j / 4.0;
            const double fb = f(tb);
            if ((fa < 0.0) != (fb < 0.0)) {
                double lo = ta, hi = tb;
                const bool lo_neg = fa < 0.0;
                while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
                    const double mid = 0.5 * (lo + hi);
                    if ((f(mid) < 0.0) == lo_neg) lo = mid;
                    else hi = mid;
                }
                cross.push_back({0.5 * (lo + hi), !lo_neg});
            }
            ta = tb;
            fa = fb;
        }
    }
    if (cross.empty()) return std::nullopt;
    if (cross.size() != 2 || !cross[0].inward || cross[1].inward) {
        std::ostringstream os;
        os << "boundary data: " << cross.size()
           << " sphere crossings, expected one entry and one exit (energy below threshold?)";
        throw InvariantViolation(os.str());
    }

    BoundaryDatum d;
    d.R = R;
    d.t_minus = cross[0].t;
    d.t_plus = cross[1].t;
    d.q0 = tr.position(d.t_minus);
    d.q = tr.position(d.t_plus);
    d.k0 = tr.velocity(d.t_minus);
    d.k = tr.velocity(d.t_plus);
    const double sc = energy_scale(ctx);
    d.energy_residual = std::max(std::abs(ctx.energy(model, d.q0, d.k0) - ctx.E),
                                 std::abs(ctx.energy(model, d.q, d.k) - ctx.E)) / sc;
    if (d.q0.dot(d.k0) >= 0.0 || d.q.dot(d.k) <= 0.0)
        throw InvariantViolation("boundary data: crossing velocities do not point in and out");
    return d;
}

BoundaryReplay replay_boundary(const FieldModel& model, const EnergyContext& ctx,
                               const BoundaryDatum& d, double tol) {
    const double speed = ctx.speed_at(model.potential(d.q0));
    const Vec k0 = d.k0 * (speed / d.k0.norm());
    const Trajectory tr = integrate(model, ctx, d.q0, k0, d.t_minus, d.t_plus, tol);
    BoundaryReplay out;
    out.position_error = (tr.position(d.t_plus) - d.q).norm();
    out.velocity_error = (tr.velocity(d.t_plus) - d.k).norm();
    return out;
}

std::vector<AngleRecord> sample_map_angles(const FieldModel& model, const EnergyContext& ctx,
                                           const std::vector<double>& q, const ShootOptions& opt) {
    if (model.dimension() < 2) throw ValidationError("map sampling needs dimension >= 2");
    const int n = model.dimension();
    const double sp = ctx.speed_at_infinity();
    std::vector<AngleRecord> out;
    out.reserve(q.size());
    for (double qi : q) {
        if (!(qi > 0.0) || !std::isfinite(qi)) throw ValidationError("map sampling: q must be positive");
        Vec v = Vec::Zero(n), x = Vec::Zero(n);
        v(1) = sp;
        x(0) = qi / sp;
        const ScatteringRun run = scattering_map(model, ctx, v, x, opt);
        const Vec& vp = run.asymptotes.v_plus;
        out.push_back({qi, std::atan2(vp(1), vp(0)), 0.0});
    }
    return out;
}

DeflectionCurve deflection_from_map(std::vector<AngleRecord>& records, const CurveMeta& meta) {
    if (records.size() < 2) throw ValidationError("deflection from map: need at least two samples");
    std::sort(records.begin(), records.end(), [](const AngleRecord& a, const AngleRecord& b) { return a.q < b.q; });
    auto branch_near = [](double a, double target) { return a + 2.0 * pi * std::round((target - a) / (2.0 * pi)); };

    // v_+ = |v| (cos(Theta - pi/2), sin(Theta - pi/2)); Theta -> pi at large q
    double prev = pi;
    for (std::size_t i = records.size(); i-- > 0;) {
        const double th = branch_near(records[i].raw_angle + 0.5 * pi, prev);
        if (i + 1 < records.size() && std::abs(th - prev) > 0.5 * pi) {
            std::ostringstream os;
            os.precision(17);
            os << "deflection from map: angle jump above pi/2 between q = " << records[i].q << " and q = "
               << records[i + 1].q << "; grid too coarse for unwrapping";
            throw ValidationError(os.str());
        }
        records[i].unwrapped = th;
        prev = th;
    }

    std::vector<double> q(records.size()), g(records.size());
    const double k = meta.regime == Regime::relativistic ? meta.E : 1.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        q[i] = records[i].q;
        g[i] = records[i].unwrapped / (k * q[i]);
    }
    return DeflectionCurve(meta, std::move(q), std::move(g));
}

DeflectionCurve map_deflection(const RadialScatteringContext& rc, const FieldModel& model,
                               const DeflectionGrid& grid, const ShootOptions& opt) {
    auto rec = sample_map_angles(model, rc.ctx, log_grid(rc.beta, grid), opt);
    return deflection_from_map(rec, curve_meta(rc));
}

}  // namespace invscat
