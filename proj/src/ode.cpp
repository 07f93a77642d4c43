#include "invscat/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invscat::ode {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// PI controller constants (Hairer & Wanner, DOPRI5 defaults)
constexpr double safe = 0.9;
constexpr double beta_pi = 0.04;
constexpr double expo1 = 0.2 - beta_pi * 0.75;
constexpr double fac_min = 0.2;   // hnew >= 0.2 h
constexpr double fac_max = 10.0;  // hnew <= 10 h

double scaled_norm(const Vec& e, const Vec& y0, const Vec& y1, const Options& opt) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sk = opt.atol + opt.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = e(i) / sk;
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(e.size()));
}

double initial_step(const Rhs& f, double t0, const Vec& y0, const Vec& k1, double span,
                    const Options& opt, Stats& st) {
    const double dnf = scaled_norm(k1, y0, y0, opt);
    const double dny = scaled_norm(y0, y0, y0, opt);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, span);
    Vec y1 = y0 + h * k1;
    Vec k2(y0.size());
    f(t0 + h, y1, k2);
    ++st.rhs_evals;
    const double der2 = scaled_norm(k2 - k1, y0, y0, opt) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, span, opt.max_step});
}

}  // namespace

DenseSolution::DenseSolution(double t0, Vec y0) {
    t_.push_back(t0);
    y_.push_back(std::move(y0));
}

void DenseSolution::append(Segment seg, double t1, Vec y1) {
    seg_.push_back(std::move(seg));
    t_.push_back(t1);
    y_.push_back(std::move(y1));
}

Vec DenseSolution::operator()(double t) const {
    if (seg_.empty()) return y_.front();
    const double slack = 1e-12 * std::max({1.0, std::abs(t_.front()), std::abs(t_.back())});
    if (t < t_.front() - slack || t > t_.back() + slack) {
        std::ostringstream os;
        os << "dense output requested at t=" << t << " outside [" << t_.front() << ", "
           << t_.back() << "]";
        throw std::out_of_range(os.str());
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    k = std::min(k, seg_.size() - 1);
    const Segment& s = seg_[k];
    const double theta = (t - s.t0) / s.h;
    const double theta1 = 1.0 - theta;
    return s.coeff[0] +
           theta * (s.coeff[1] + theta1 * (s.coeff[2] + theta * (s.coeff[3] + theta1 * s.coeff[4])));
}

Solution dopri5(const Rhs& f, double t0, const Vec& y0, double t_end, const Options& opt,
                const Observer& observer) {
    if (!(t_end > t0)) throw ValidationError("dopri5: t_end must exceed t0");
    if (!y0.allFinite()) throw ValidationError("dopri5: non-finite initial state");

    Solution out;
    out.dense = DenseSolution(t0, y0);
    Stats& st = out.stats;
    const auto n = y0.size();

    Vec y = y0, ynew(n), ytmp(n), err(n);
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    f(t0, y, k1);
    ++st.rhs_evals;

    double t = t0;
    double h = opt.initial_step > 0 ? opt.initial_step
                                    : initial_step(f, t0, y0, k1, t_end - t0, opt, st);
    double facold = 1e-4;
    bool last_rejected = false;

    while (t < t_end) {
        if (st.accepted + st.rejected >= opt.max_steps) {
            std::ostringstream os;
            os << "dopri5: step budget exhausted; last good time t=" << t;
            throw NumericalError(os.str());
        }
        h = std::min(h, opt.max_step);
        if (opt.step_limit) h = std::min(h, opt.step_limit(t, y));
        if (t + h > t_end || t + 1.01 * h >= t_end) h = t_end - t;
        if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "dopri5: step size underflow; last good time t=" << t;
            throw NumericalError(os.str());
        }

        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        st.rhs_evals += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double enorm = scaled_norm(err, y, ynew, opt);
        if (!std::isfinite(enorm)) enorm = 1e10;

        const double fac11 = std::pow(std::max(enorm, 1e-300), expo1);
        double fac = fac11 / std::pow(facold, beta_pi);
        fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
        double hnew = h / fac;

        if (enorm <= 1.0) {
            facold = std::max(enorm, 1e-4);
            ++st.accepted;

            DenseSolution::Segment seg;
            seg.t0 = t;
            seg.h = h;
            seg.coeff[0] = y;
            seg.coeff[1] = ynew - y;
            seg.coeff[2] = h * k1 - seg.coeff[1];
            seg.coeff[3] = seg.coeff[1] - h * k7 - seg.coeff[2];
            seg.coeff[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            k1 = k7;  // FSAL
            y = ynew;
            t = (t + h >= t_end) ? t_end : t + h;
            out.dense.append(std::move(seg), t, y);

            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;
            h = hnew;

            if (observer && !observer(t, y, t_end)) {
                out.stopped_by_observer = true;
                break;
            }
        } else {
            ++st.rejected;
            hnew = h / std::min(1.0 / fac_min, fac11 / safe);
            last_rejected = true;
            h = hnew;
        }
    }
    return out;
}

}  // namespace invscat::ode
