#include "invscat/pipeline.hpp"

#include "invscat/inversion.hpp"
#include "invscat/scatmap.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace invscat {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

struct Constants {
    double beta = nan, beta_prime = nan, C_E = nan, R_E = nan;
};

Constants constants(const RunConfig& cfg) {
    Constants k;
    const auto field = cfg.field();
    const auto nt = nontrapping_constants(cfg.energy(), field->bounds(), cfg.dimension);
    k.C_E = nt.C_E;
    k.R_E = nt.R_E;
    try {
        const auto rc = cfg.radial_context();
        k.beta = rc.beta;
        k.beta_prime = compute_beta_prime(rc);
    } catch (const ValidationError&) {
        // below the radial thresholds; reported as nan
    }
    return k;
}

void write_manifest(const RunConfig& cfg, const std::string& out_dir, const std::string& command,
                    CommandResult& res) {
    json files = json::array();
    for (const auto& f : res.files) files.push_back(fs::path(f).filename().string());
    const std::string path = join(out_dir, "manifest.json");
    write_json(path, constants_block(cfg, "manifest"), {{"command", command}, {"files", files}});
    res.files.push_back(path);
}

void check_curve_matches(const DeflectionCurve& curve, const RadialScatteringContext& rc, const std::string& path) {
    const CurveMeta& m = curve.meta();
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    if (m.regime != rc.ctx.regime) throw ValidationError(path + ": regime differs from the config");
    if (!close(m.E, rc.ctx.E)) throw ValidationError(path + ": E differs from the config");
    if (m.regime == Regime::relativistic && !close(m.c, rc.ctx.c))
        throw ValidationError(path + ": c differs from the config");
    if (std::abs(m.alpha - rc.bounds.alpha) > 1e-12 * rc.bounds.alpha)
        throw ValidationError(path + ": alpha differs from the config");
}

DeflectionCurve make_curve(const RunConfig& cfg, const RadialScatteringContext& rc, DeflectionSource src) {
    if (src == DeflectionSource::map)
        return map_deflection(rc, *cfg.field(), cfg.deflection_grid(), cfg.shoot_options());
    return sample_deflection(rc, cfg.deflection_grid(), cfg.tol.quadrature);
}

std::string deflection_file(const RunConfig& cfg, const std::string& out_dir, const DeflectionCurve& curve,
                            DeflectionSource src) {
    Meta meta = constants_block(cfg, "deflection");
    meta.emplace_back("source", src == DeflectionSource::map ? "map" : "quadrature");
    const std::string path = join(out_dir, "deflection.csv");
    write_csv(path, meta, {"q", "g"}, {curve.q(), curve.g_samples()});
    return path;
}

struct Reconstruction {
    InversionOutput inv;
    AbelConsistency consistency;
};

Reconstruction reconstruct(const RunConfig& cfg, const RadialScatteringContext& rc, const DeflectionCurve& curve) {
    curve.require_coverage(rc.beta, rc.q_max);
    auto shared = std::make_shared<const DeflectionCurve>(curve);
    const double bp = compute_beta_prime(rc);
    Reconstruction r;
    r.inv = invert_curve(shared, rc.ctx, bp, cfg.grids.sigma_points, cfg.grids.s_points, cfg.grids.s_hi_factor,
                         rc.profile.get());
    r.consistency = consistency_check_H(r.inv.abel, rc);
    return r;
}

std::vector<std::string> write_reconstruction(const RunConfig& cfg, const std::string& out_dir,
                                              const Reconstruction& r) {
    const auto& res = r.inv.result;
    const std::string csv = join(out_dir, "reconstruction.csv");
    write_csv(csv, constants_block(cfg, "reconstruction"), {"s", "W_rec", "W_true", "abs_err", "rel_err"},
              {res.s, res.W_rec, res.W_true, res.abs_err, res.rel_err});
    json body = {{"sup_abs_err", res.sup_abs_err},
                 {"sup_rel_err", res.sup_rel_err},
                 {"l2_rel_err", res.l2_rel_err},
                 {"s_min", res.s.front()},
                 {"s_max", res.s.back()},
                 {"abel_H_residual", r.consistency.max_H_residual},
                 {"abel_dlogchi_residual", r.consistency.max_dlogchi_residual},
                 {"E", res.E},
                 {"beta", res.beta},
                 {"beta_prime", res.beta_prime}};
    const std::string js = join(out_dir, "summary.json");
    write_json(js, constants_block(cfg, "summary"), body);
    return {csv, js};
}

json check(const std::string& name, double value, double limit) {
    return {{"name", name}, {"value", value}, {"limit", limit}, {"pass", value <= limit}};
}

}  // namespace

DeflectionSource parse_source(const std::string& s) {
    if (s == "quadrature") return DeflectionSource::quadrature;
    if (s == "map") return DeflectionSource::map;
    throw ValidationError("--source must be quadrature or map, got " + s);
}

Meta constants_block(const RunConfig& cfg, const std::string& artifact) {
    const Constants k = constants(cfg);
    return {{"artifact", artifact},
            {"config_sha256", cfg.hash},
            {"regime", regime_tag(cfg.regime)},
            {"E", fmt17(cfg.E)},
            {"c", cfg.regime == Regime::relativistic ? fmt17(cfg.c) : "inf"},
            {"alpha", fmt17(cfg.profile()->bounds().alpha)},
            {"beta", fmt17(k.beta)},
            {"beta_prime", fmt17(k.beta_prime)},
            {"C_E", fmt17(k.C_E)},
            {"R_E", fmt17(k.R_E)}};
}

CommandResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    const auto field = cfg.field();
    const EnergyContext ctx = cfg.energy();
    const int n = cfg.dimension;
    const double sp = ctx.speed_at_infinity();

    std::vector<IncomingRun> runs = cfg.runs;
    for (double q : cfg.impacts) {
        Vec v = Vec::Zero(n), x = Vec::Zero(n);
        v(1) = sp;
        x(0) = q / sp;
        runs.push_back({v, x});
    }

    std::vector<ScatteringRun> done;
    for (const auto& r : runs) done.push_back(scattering_map(*field, ctx, r.v_minus, r.x_minus, cfg.shoot_options()));

    // boundary data on the sphere beyond which the model is radial
    std::vector<BoundaryDatum> bd;
    int misses = 0;
    const double Rs = std::max(cfg.R, field->radial_radius().value_or(cfg.R));
    if (cfg.boundary_samples > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> N(0.0, 1.0);
        std::uniform_real_distribution<double> U(-0.95, 0.95);
        for (int tries = 0; static_cast<int>(bd.size()) < cfg.boundary_samples; ++tries) {
            if (tries >= 20 * cfg.boundary_samples)
                throw NumericalError("boundary sampling: too many orbits miss the ball");
            Vec u(n), w(n);
            for (int i = 0; i < n; ++i) u(i) = N(rng);
            for (int i = 0; i < n; ++i) w(i) = N(rng);
            u.normalize();
            w -= w.dot(u) * u;
            w.normalize();
            const Vec x = U(rng) * Rs * w;
            auto d = extract_boundary_data(*field, ctx, sp * u, x, Rs, cfg.shoot_options());
            if (d) bd.push_back(*d);
            else ++misses;
        }
    }

    CommandResult res;
    json asym = json::array();
    for (std::size_t k = 0; k < done.size(); ++k) {
        const Trajectory& tr = done[k].trajectory;
        const auto& ts = tr.dense().times();
        std::vector<std::vector<double>> cols(static_cast<std::size_t>(2 * n + 2));
        std::vector<std::string> names{"t"};
        for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
        for (int i = 1; i <= n; ++i) names.push_back("v" + std::to_string(i));
        names.push_back("energy_residual");
        for (std::size_t j = 0; j < ts.size(); ++j) {
            const Vec x = tr.position(ts[j]), v = tr.velocity(ts[j]);
            cols[0].push_back(ts[j]);
            for (int i = 0; i < n; ++i) cols[static_cast<std::size_t>(1 + i)].push_back(x(i));
            for (int i = 0; i < n; ++i) cols[static_cast<std::size_t>(1 + n + i)].push_back(v(i));
            cols.back().push_back(tr.energy_residuals()[j]);
        }
        char name[64];
        std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
        const std::string path = join(out_dir, name);
        write_csv(path, constants_block(cfg, "trajectory"), names, cols);
        res.files.push_back(path);

        const AsymptoteData& a = done[k].asymptotes;
        asym.push_back({{"trajectory", name},
                        {"v_minus", to_json(a.v_minus)},
                        {"x_minus", to_json(a.x_minus)},
                        {"v_plus", to_json(a.v_plus)},
                        {"x_plus", to_json(a.x_plus)},
                        {"residual_minus", a.residual_minus},
                        {"residual_plus", a.residual_plus},
                        {"t_start", done[k].t_start},
                        {"t_escape", done[k].t_escape},
                        {"max_energy_drift", tr.max_energy_drift()},
                        {"energy_drift_ok", tr.max_energy_drift() <= cfg.tol.energy_drift}});
    }
    const std::string ap = join(out_dir, "asymptotes.json");
    write_json(ap, constants_block(cfg, "asymptotes"), {{"runs", asym}});
    res.files.push_back(ap);

    if (cfg.boundary_samples > 0) {
        std::vector<std::string> names;
        for (const char* g : {"q0_", "q_", "k0_", "k_"})
            for (int i = 1; i <= n; ++i) names.push_back(g + std::to_string(i));
        names.push_back("t_minus");
        names.push_back("t_plus");
        std::vector<std::vector<double>> cols(names.size());
        for (const auto& d : bd) {
            std::size_t j = 0;
            for (const Vec* v : {&d.q0, &d.q, &d.k0, &d.k})
                for (int i = 0; i < n; ++i) cols[j++].push_back((*v)(i));
            cols[j++].push_back(d.t_minus);
            cols[j++].push_back(d.t_plus);
        }
        Meta meta = constants_block(cfg, "boundary");
        meta.emplace_back("R", fmt17(Rs));
        meta.emplace_back("seed", std::to_string(cfg.seed));
        meta.emplace_back("misses", std::to_string(misses));
        const std::string path = join(out_dir, "boundary.csv");
        write_csv(path, meta, names, cols);
        res.files.push_back(path);
    }
    write_manifest(cfg, out_dir, "simulate", res);
    return res;
}

CommandResult cmd_deflect(const RunConfig& cfg, const std::string& out_dir, DeflectionSource src) {
    const auto rc = cfg.radial_context();
    const DeflectionCurve curve = make_curve(cfg, rc, src);
    CommandResult res;
    res.files.push_back(deflection_file(cfg, out_dir, curve, src));
    write_manifest(cfg, out_dir, "deflect", res);
    return res;
}

CommandResult cmd_reconstruct(const RunConfig& cfg, const std::string& out_dir, const std::string& deflection_csv) {
    const auto rc = cfg.radial_context();
    const DeflectionCurve curve = read_deflection_csv(deflection_csv);
    check_curve_matches(curve, rc, deflection_csv);
    const Reconstruction r = reconstruct(cfg, rc, curve);
    CommandResult res;
    res.files = write_reconstruction(cfg, out_dir, r);
    write_manifest(cfg, out_dir, "reconstruct", res);
    return res;
}

CommandResult cmd_roundtrip(const RunConfig& cfg, const std::string& out_dir, DeflectionSource src) {
    const auto field = cfg.field();
    const EnergyContext ctx = cfg.energy();
    const NontrappingReport nt = nontrapping_constants(ctx, field->bounds(), cfg.dimension);

    CommandResult res;
    json checks = json::array();
    json notes = json::array();
    auto finish = [&](const std::string& message) {
        res.message = message;
        const std::string path = join(out_dir, "report.json");
        write_json(path, constants_block(cfg, "report"),
                   {{"verdict", res.passed ? "PASS" : "FAIL"}, {"message", message}, {"checks", checks},
                    {"notes", notes}});
        res.files.push_back(path);
        write_manifest(cfg, out_dir, "roundtrip", res);
        return res;
    };

    // E1 is the energy at which R_E reaches R. It gates the nonrelativistic
    // run only: the relativistic constants are far more conservative, do not
    // reduce to the nonrelativistic ones as c grows, and E1 need not exist
    // at all there. For that regime it is reported and beta, beta' gate.
    const double Rs = std::max(cfg.R, field->radial_radius().value_or(cfg.R));
    const auto E1 = energy_threshold_E1(ctx.regime, ctx.c, field->bounds(), cfg.dimension, Rs);
    if (!ctx.relativistic_regime() && E1 && ctx.E < *E1) {
        std::ostringstream os;
        os.precision(17);
        os << "energy below admissible threshold E1 = " << *E1 << ": R_E = " << nt.R_E << " exceeds R = " << Rs
           << " (C_E = " << nt.C_E << ")";
        res.passed = false;
        return finish(os.str());
    }
    if (ctx.relativistic_regime()) {
        std::ostringstream os;
        os.precision(17);
        if (E1) os << "relativistic E1 = " << *E1 << (ctx.E < *E1 ? " exceeds E" : " is met") << "; not a gate";
        else os << "relativistic E1 does not exist for this c and R; not a gate";
        notes.push_back(os.str());
    }
    RadialScatteringContext rc;
    try {
        rc = cfg.radial_context();
        (void)compute_beta_prime(rc);
    } catch (const ValidationError& e) {
        std::ostringstream os;
        os.precision(17);
        os << "energy below admissible threshold: " << e.what() << " (C_E = " << nt.C_E << ", R_E = " << nt.R_E
           << ")";
        res.passed = false;
        return finish(os.str());
    }

    const DeflectionCurve curve = make_curve(cfg, rc, src);
    const Reconstruction r = reconstruct(cfg, rc, curve);
    checks.push_back(check("reconstruction_sup_rel_err", r.inv.result.sup_rel_err, cfg.tol.reconstruction));
    checks.push_back(check("abel_H_residual", r.consistency.max_H_residual, cfg.tol.abel));
    checks.push_back(check("abel_dlogchi_residual", r.consistency.max_dlogchi_residual, cfg.tol.abel));

    if (ctx.relativistic_regime()) {
        // relativistic corrections are O(v^2/c^2) relative to the deflection itself;
        // observed ratio ~0.5, the limit leaves a factor 4
        const double c2 = ctx.c * ctx.c;
        const double Ek = ctx.E - c2;
        const auto nr = make_radial_context(EnergyContext::nonrelativistic(Ek), rc.profile);
        const double b_lo = 1.05 * std::max(rc.beta / ctx.speed_at_infinity(), nr.beta / nr.ctx.speed_at_infinity());
        const double b_hi = 10.0 * b_lo;
        double dev = 0.0;
        for (int k = 0; k < 24; ++k) {
            const double q = b_lo * std::pow(10.0, k / 23.0) * nr.ctx.speed_at_infinity();
            dev = std::max(dev, std::abs(q * deflection_quadrature(nr, q) - std::numbers::pi));
        }
        const double gap = nonrelativistic_limit_gap(rc, b_lo, b_hi);
        checks.push_back(check("nonrel_limit_gap", gap, 2.0 * Ek / c2 * std::max(dev, 1e-300)));
    }
    for (const auto& c : checks) res.passed = res.passed && c.at("pass").get<bool>();

    res.files.push_back(deflection_file(cfg, out_dir, curve, src));
    for (auto& f : write_reconstruction(cfg, out_dir, r)) res.files.push_back(f);
    return finish(res.passed ? "all checks within tolerance" : "one or more checks exceed tolerance");
}

}  // namespace invscat
