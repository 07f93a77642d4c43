#include "invscat/inversion.hpp"

#include "invscat/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invscat {

namespace {

constexpr double pi = std::numbers::pi;

double kappa(const CurveMeta& m) { return m.regime == Regime::relativistic ? m.E : 1.0; }

// int_0^{pi/2} f(q(psi), psi) dpsi with q = sigma^{-1/2}/sin(psi), split at the
// images of the curve knots so that each piece sees one cubic.
template <class F>
double psi_integral(const DeflectionCurve& curve, double sigma, F&& f) {
    if (!(sigma > 0.0)) throw ValidationError("Abel integral: sigma must be positive");
    const double q0 = 1.0 / std::sqrt(sigma);
    if (q0 < curve.q_min() * (1.0 - 1e-12)) {
        std::ostringstream os;
        os.precision(17);
        os << "Abel integral: sigma = " << sigma << " needs g at q = " << q0 << " < q_min = " << curve.q_min();
        throw ValidationError(os.str());
    }
    auto integrand = [&](double psi) {
        const double sn = std::sin(psi);
        if (sn <= 0.0) return 0.0;
        return f(q0 / sn, psi);
    };

    std::vector<double> bp{0.0};
    const auto& qs = curve.q();
    for (std::size_t k = qs.size(); k-- > 0;) {
        if (qs[k] <= q0 * (1.0 + 1e-14)) break;
        bp.push_back(std::asin(q0 / qs[k]));
    }
    bp.push_back(0.5 * pi);

    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double a = bp[i], b = bp[i + 1];
        if (!(b > a)) continue;
        if (i == 0 && qs.back() > q0) {
            // analytic tail beyond q_max; behaves like psi^(alpha+1) at 0
            sum += boost::math::quadrature::gauss<double, 30>::integrate(integrand, a, b);
        } else {
            sum += boost::math::quadrature::gauss<double, 10>::integrate(integrand, a, b);
        }
    }
    return sum;
}

}  // namespace

std::vector<double> sigma_grid(double beta, int count, double lo_factor, double hi_factor) {
    if (!(beta > 0.0) || count < 2 || !(lo_factor > 0.0) || !(hi_factor < 1.0) || !(lo_factor < hi_factor))
        throw ValidationError("sigma grid: need beta > 0, count >= 2, 0 < lo < hi < 1");
    const double b2 = 1.0 / (beta * beta);
    std::vector<double> s(static_cast<std::size_t>(count));
    const double l0 = std::log(lo_factor), l1 = std::log(hi_factor);
    for (int i = 0; i < count; ++i) s[static_cast<std::size_t>(i)] = b2 * std::exp(l0 + (l1 - l0) * i / (count - 1));
    return s;
}

double abel_H(const DeflectionCurve& curve, double sigma) {
    return psi_integral(curve, sigma, [&](double q, double) { return curve.g(q); });
}

double abel_dH(const DeflectionCurve& curve, double sigma) {
    return psi_integral(curve, sigma, [&](double q, double) { return curve.dg(q) * (-q / (2.0 * sigma)); });
}

AbelTable abel_transform(std::shared_ptr<const DeflectionCurve> curve, const std::vector<double>& sigma) {
    if (!curve) throw ValidationError("abel_transform: missing deflection curve");
    if (sigma.empty()) throw ValidationError("abel_transform: empty sigma grid");
    AbelTable t;
    t.curve = std::move(curve);
    t.sigma = sigma;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (i > 0 && !(sigma[i] > sigma[i - 1])) throw ValidationError("abel_transform: sigma grid must be increasing");
        t.H.push_back(abel_H(*t.curve, sigma[i]));
        t.dH.push_back(abel_dH(*t.curve, sigma[i]));
    }
    return t;
}

AbelConsistency consistency_check_H(const AbelTable& table, const RadialScatteringContext& rc) {
    AbelConsistency out;
    const double E = rc.ctx.E;
    const bool rel = rc.ctx.relativistic_regime();
    const double c = rc.ctx.c;
    const double kap = rel ? E : 1.0;
    for (std::size_t i = 0; i < table.sigma.size(); ++i) {
        const double s = table.sigma[i];
        const double q = 1.0 / std::sqrt(s);
        const double rm = r_min(rc, q);
        const double chi = 1.0 / rm;
        auto f = [&](double u) {
            const double W = u > 0.0 ? rc.profile->W(1.0 / u) : 0.0;
            const double K = E - W;
            return rel ? 1.0 / std::sqrt((K - c * c) * (K + c * c)) : 1.0 / std::sqrt(2.0 * K);
        };
        double Htrue = pi * quad::integrate(f, 0.0, chi, 1e-13).value;
        if (rel) Htrue /= c;
        out.max_H_residual = std::max(out.max_H_residual, std::abs(table.H[i] - Htrue) / Htrue);

        const double dlogchi = r_min_derivative(rc, q) / rm * q / (2.0 * s);
        const double lhs = kap * table.dH[i] / (pi * std::sqrt(s));
        out.max_dlogchi_residual = std::max(out.max_dlogchi_residual, std::abs(lhs - dlogchi) / std::abs(dlogchi));
    }
    return out;
}

double chi_log_integrand(const DeflectionCurve& curve, double s) {
    const double Tinf = curve.theta_infinity();
    const double I = psi_integral(curve, s, [&](double q, double psi) {
        return std::sin(psi) * (curve.theta(q) - Tinf - curve.theta_log_derivative(q));
    });
    return kappa(curve.meta()) * I / (2.0 * pi * s);
}

double chi_prefactor(const EnergyContext& ctx) {
    if (!ctx.relativistic_regime()) return std::sqrt(2.0 * ctx.E);
    const double c2 = ctx.c * ctx.c;
    return ctx.c * std::sqrt((ctx.E - c2) * (ctx.E + c2)) / ctx.E;
}

ChiTable::ChiTable(std::vector<double> sigma, std::vector<double> chi)
    : sigma_(std::move(sigma)), chi_(std::move(chi)) {
    if (sigma_.size() < 2 || sigma_.size() != chi_.size()) throw ValidationError("ChiTable: need >= 2 samples");
    std::vector<double> ls(sigma_.size()), lc(chi_.size());
    for (std::size_t i = 0; i < sigma_.size(); ++i) {
        if (!(chi_[i] > 0.0) || !std::isfinite(chi_[i])) throw NumericalError("ChiTable: chi must be positive and finite");
        if (i > 0 && !(chi_[i] > chi_[i - 1])) {
            std::ostringstream os;
            os << "ChiTable: chi is not strictly increasing at sigma = " << sigma_[i];
            throw InvariantViolation(os.str());
        }
        ls[i] = std::log(sigma_[i]);
        lc[i] = std::log(chi_[i]);
    }
    log_chi_ = MonotoneCubic(ls, lc);
}

double ChiTable::chi(double sigma) const { return std::exp(log_chi_(std::log(sigma))); }

double ChiTable::phi(double x) const {
    if (!(x >= chi_.front() * (1.0 - 1e-12) && x <= chi_.back() * (1.0 + 1e-12))) {
        std::ostringstream os;
        os.precision(17);
        os << "phi: argument " << x << " outside the chi range [" << chi_.front() << ", " << chi_.back() << "]";
        throw ValidationError(os.str());
    }
    const double target = std::log(x);
    double lo = std::log(sigma_.front()), hi = std::log(sigma_.back());
    if (target <= log_chi_(lo)) return sigma_.front();
    if (target >= log_chi_(hi)) return sigma_.back();
    // 1e-12 relative in sigma
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (log_chi_(mid) < target ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

ChiTable reconstruct_chi(const AbelTable& table, const EnergyContext& ctx) {
    if (!table.curve) throw ValidationError("reconstruct_chi: Abel table has no curve");
    const DeflectionCurve& curve = *table.curve;
    const auto& sig = table.sigma;
    auto J = [&](double s) { return chi_log_integrand(curve, s); };

    std::vector<double> chi(sig.size());
    // graded first piece: s = w^2 removes the s^(alpha/2-1) behaviour at 0
    using G = boost::math::quadrature::gauss<double, 20>;
    double acc = G::integrate([&](double w) { return 2.0 * w * J(w * w); }, 0.0, std::sqrt(sig.front()));
    const double pref = chi_prefactor(ctx);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        // J is smooth in ln s and the grid is geometric
        if (i > 0)
            acc += G::integrate([&](double u) { const double s = std::exp(u); return s * J(s); },
                                std::log(sig[i - 1]), std::log(sig[i]));
        if (!std::isfinite(acc)) throw NumericalError("reconstruct_chi: integrand blow-up near 0; check the declared alpha");
        chi[i] = pref * std::sqrt(sig[i]) * std::exp(acc);
    }
    return ChiTable(sig, chi);
}

std::vector<double> radius_grid(const ChiTable& chi, double beta_prime, int count, double hi_factor) {
    const double lo = std::max(beta_prime, 1.0 / chi.chi_max()) * (1.0 + 1e-9);
    const double hi = std::min(hi_factor * beta_prime, (1.0 / chi.chi_min()) * (1.0 - 1e-9));
    if (!(hi > lo) || count < 2) {
        std::ostringstream os;
        os << "radius grid: empty reconstruction window [" << lo << ", " << hi << "]";
        throw ValidationError(os.str());
    }
    std::vector<double> s(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) s[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (count - 1));
    return s;
}

ReconstructionResult reconstruct_W(const ChiTable& chi, const EnergyContext& ctx, const std::vector<double>& s,
                                   const RadialProfile* truth) {
    ReconstructionResult r;
    r.regime = ctx.regime;
    r.E = ctx.E;
    r.c = ctx.c;
    r.s = s;
    const double E = ctx.E;
    double num = 0.0, den = 0.0;
    for (double si : s) {
        const double ph = chi.phi(1.0 / si);
        if (!(ph > 0.0)) throw NumericalError("reconstruct_W: phi(1/s) <= 0; chi not monotone upstream");
        double W;
        if (!ctx.relativistic_regime()) {
            W = E - 1.0 / (2.0 * si * si * ph);
        } else {
            const double c = ctx.c;
            W = E - std::sqrt(c * c * c * c + E * E / (c * c * si * si * ph));
        }
        r.W_rec.push_back(W);
        if (truth) {
            const double Wt = truth->W(si);
            const double ae = std::abs(W - Wt);
            const double re = Wt != 0.0 ? ae / std::abs(Wt) : ae;
            r.W_true.push_back(Wt);
            r.abs_err.push_back(ae);
            r.rel_err.push_back(re);
            r.sup_abs_err = std::max(r.sup_abs_err, ae);
            r.sup_rel_err = std::max(r.sup_rel_err, re);
            num += ae * ae;
            den += Wt * Wt;
        }
    }
    if (truth) r.l2_rel_err = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / double(s.size()));
    return r;
}

double compute_beta_prime(const RadialScatteringContext& rc) {
    const double bp = beta_prime_formula(rc.ctx, rc.bounds, rc.beta);
    const double rm = r_min(rc, rc.beta);
    if (rm > bp * (1.0 + 1e-12)) {  // equality up to rounding occurs for the free field
        std::ostringstream os;
        os.precision(17);
        os << "beta' = " << bp << " is below r_min(beta) = " << rm;
        throw InvariantViolation(os.str());
    }
    return bp;
}

InversionOutput invert_curve(std::shared_ptr<const DeflectionCurve> curve, const EnergyContext& ctx,
                             double beta_prime, int sigma_points, int radius_points, double hi_factor,
                             const RadialProfile* truth) {
    if (!curve) throw ValidationError("invert_curve: missing curve");
    InversionOutput out;
    const double beta = curve->meta().beta > 0.0 ? curve->meta().beta : curve->q_min();
    out.abel = abel_transform(curve, sigma_grid(std::max(beta, curve->q_min()), sigma_points));
    out.chi = reconstruct_chi(out.abel, ctx);
    out.result = reconstruct_W(out.chi, ctx, radius_grid(out.chi, beta_prime, radius_points, hi_factor), truth);
    out.result.beta = beta;
    out.result.beta_prime = beta_prime;
    return out;
}

}  // namespace invscat
