#include "invscat/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace invscat {

namespace {

using nlohmann::json;

// Maps JSON pointers to the line where the key (or array element) starts.
// nlohmann reports positions only for syntax errors, so semantic errors
// need this side table.
class LineIndex {
public:
    explicit LineIndex(const std::string& text) { scan(text); }

    int line(std::string ptr) const {
        while (true) {
            auto it = lines_.find(ptr);
            if (it != lines_.end()) return it->second;
            const auto cut = ptr.rfind('/');
            if (cut == std::string::npos || ptr.empty()) return 1;
            ptr.resize(cut);
        }
    }

private:
    struct Frame {
        bool object;
        std::string path;
        std::string key;
        int index = 0;
        bool want_key = true;
        bool element_seen = false;
    };

    void scan(const std::string& t) {
        std::vector<Frame> st;
        int line = 1;
        auto value_path = [&]() -> std::string {
            if (st.empty()) return "";
            const Frame& f = st.back();
            return f.path + "/" + (f.object ? f.key : std::to_string(f.index));
        };
        auto value_start = [&]() {
            if (!st.empty() && !st.back().object && !st.back().element_seen) {
                lines_.emplace(value_path(), line);
                st.back().element_seen = true;
            }
        };
        for (std::size_t i = 0; i < t.size(); ++i) {
            const char ch = t[i];
            if (ch == '\n') {
                ++line;
            } else if (ch == '"') {
                std::string s;
                for (++i; i < t.size() && t[i] != '"'; ++i) {
                    if (t[i] == '\\' && i + 1 < t.size()) ++i;
                    s += t[i];
                }
                if (!st.empty() && st.back().object && st.back().want_key) {
                    st.back().key = s;
                    st.back().want_key = false;
                    lines_.emplace(value_path(), line);
                } else {
                    value_start();
                }
            } else if (ch == '{' || ch == '[') {
                value_start();
                st.push_back(Frame{ch == '{', value_path(), {}, 0, true, false});
            } else if (ch == '}' || ch == ']') {
                if (!st.empty()) st.pop_back();
            } else if (ch == ',') {
                if (!st.empty()) {
                    if (st.back().object) st.back().want_key = true;
                    else {
                        ++st.back().index;
                        st.back().element_seen = false;
                    }
                }
            } else if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ':') {
                value_start();
            }
        }
    }

    std::map<std::string, int> lines_;
};

class Validator {
public:
    Validator(const std::string& origin, const std::string& text) : origin_(origin), index_(text) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        std::ostringstream os;
        os << origin_ << ":" << index_.line(ptr) << ": " << (ptr.empty() ? "/" : ptr) << ": " << msg;
        throw ValidationError(os.str());
    }

    void only_keys(const json& obj, const std::string& ptr, std::set<std::string> allowed) const {
        if (!obj.is_object()) fail(ptr, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) fail(ptr + "/" + it.key(), "unknown key");
    }

    double number(const json& obj, const std::string& ptr, const std::string& key, std::optional<double> dflt,
                  bool positive) const {
        const std::string p = ptr + "/" + key;
        if (!obj.contains(key)) {
            if (!dflt) fail(p, "required number is missing");
            return *dflt;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) fail(p, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(p, "must be finite");
        if (positive && !(x > 0.0)) fail(p, "must be positive");
        return x;
    }

    int integer(const json& obj, const std::string& ptr, const std::string& key, int dflt, int lo) const {
        const std::string p = ptr + "/" + key;
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        if (!v.is_number_integer()) fail(p, "expected an integer");
        const auto x = v.get<long long>();
        if (x < lo || x > 1000000) fail(p, "must lie in [" + std::to_string(lo) + ", 1000000]");
        return static_cast<int>(x);
    }

    std::string string(const json& obj, const std::string& ptr, const std::string& key, const std::string& dflt,
                       std::set<std::string> choices) const {
        const std::string p = ptr + "/" + key;
        if (!obj.contains(key)) return dflt;
        if (!obj.at(key).is_string()) fail(p, "expected a string");
        auto s = obj.at(key).get<std::string>();
        if (!choices.empty() && !choices.count(s)) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            fail(p, "must be one of: " + list);
        }
        return s;
    }

    Vec vector(const json& v, const std::string& p, int n) const {
        if (!v.is_array() || static_cast<int>(v.size()) != n)
            fail(p, "expected an array of " + std::to_string(n) + " numbers");
        Vec out(n);
        for (int i = 0; i < n; ++i) {
            if (!v[i].is_number()) fail(p + "/" + std::to_string(i), "expected a number");
            out(i) = v[i].get<double>();
            if (!std::isfinite(out(i))) fail(p + "/" + std::to_string(i), "must be finite");
        }
        return out;
    }

private:
    std::string origin_;
    LineIndex index_;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin, const std::string& regime_override) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ValidationError(origin + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
    }
    const Validator v(origin, text);
    v.only_keys(doc, "", {"regime", "E", "c", "dimension", "R", "model", "tolerances", "grids", "simulate", "seed", "output"});

    RunConfig cfg;
    std::string regime = v.string(doc, "", "regime", "nonrel", {"nonrel", "rel"});
    if (!regime_override.empty()) {
        if (regime_override != "nonrel" && regime_override != "rel")
            throw ValidationError("--regime must be nonrel or rel");
        regime = regime_override;
        doc["regime"] = regime;
    }
    cfg.regime = regime == "rel" ? Regime::relativistic : Regime::nonrelativistic;
    cfg.E = v.number(doc, "", "E", std::nullopt, false);
    if (cfg.regime == Regime::relativistic) {
        cfg.c = v.number(doc, "", "c", std::nullopt, true);
        if (!(cfg.E > cfg.c * cfg.c)) v.fail("/E", "relativistic energy must exceed c^2");
    } else {
        if (!(cfg.E > 0.0)) v.fail("/E", "energy must be positive");
        if (doc.contains("c")) cfg.c = v.number(doc, "", "c", std::nullopt, true);
    }
    cfg.dimension = v.integer(doc, "", "dimension", 2, 2);
    cfg.R = v.number(doc, "", "R", 1.0, true);
    cfg.seed = static_cast<std::uint64_t>(v.integer(doc, "", "seed", 1, 0));
    cfg.output_dir = v.string(doc, "", "output", "out", {});
    if (cfg.output_dir.empty()) v.fail("/output", "must not be empty");

    if (!doc.contains("model")) v.fail("/model", "required object is missing");
    const json& m = doc.at("model");
    v.only_keys(m, "/model", {"kind", "profile", "smoothing_radius", "magnetic", "bounds"});
    ModelSpec& ms = cfg.model;
    ms.kind = v.string(m, "/model", "kind", "radial", {"zero", "radial", "magnetic_bump"});
    if (m.contains("profile")) {
        const json& p = m.at("profile");
        v.only_keys(p, "/model/profile", {"kind", "A", "alpha"});
        ms.profile = v.string(p, "/model/profile", "kind", "shifted_power", {"shifted_power", "algebraic"});
        ms.A = v.number(p, "/model/profile", "A", 1.0, false);
        ms.alpha = v.number(p, "/model/profile", "alpha", 2.0, false);
        if (!(ms.alpha > 1.0)) v.fail("/model/profile/alpha", "decay exponent must exceed 1");
    } else if (ms.kind != "zero") {
        v.fail("/model/profile", "required for kind " + ms.kind);
    }
    ms.smoothing_radius = v.number(m, "/model", "smoothing_radius", 0.5, true);
    if (ms.kind != "zero" && ms.smoothing_radius > cfg.R)
        v.fail("/model/smoothing_radius", "must not exceed R, beyond which the profile is exact");
    if (ms.kind == "magnetic_bump") {
        if (!m.contains("magnetic")) v.fail("/model/magnetic", "required for kind magnetic_bump");
        const json& b = m.at("magnetic");
        v.only_keys(b, "/model/magnetic", {"amplitude", "cutoff_radius"});
        ms.magnetic_amplitude = v.number(b, "/model/magnetic", "amplitude", std::nullopt, false);
        ms.magnetic_cutoff = v.number(b, "/model/magnetic", "cutoff_radius", std::nullopt, true);
    } else if (m.contains("magnetic")) {
        v.fail("/model/magnetic", "only valid for kind magnetic_bump");
    }
    if (m.contains("bounds")) {
        const json& b = m.at("bounds");
        v.only_keys(b, "/model/bounds", {"alpha", "beta"});
        ShortRangeBounds sb;
        sb.alpha = v.number(b, "/model/bounds", "alpha", ms.alpha, false);
        if (!(sb.alpha > 1.0)) v.fail("/model/bounds/alpha", "must exceed 1");
        if (!b.contains("beta")) v.fail("/model/bounds/beta", "required array of three constants");
        const Vec beta = v.vector(b.at("beta"), "/model/bounds/beta", 3);
        for (int i = 0; i < 3; ++i) {
            if (!(beta(i) > 0.0)) v.fail("/model/bounds/beta/" + std::to_string(i), "must be positive");
            sb.beta[static_cast<std::size_t>(i)] = beta(i);
        }
        sb.lambda = std::max({sb.beta[0], sb.beta[1], sb.beta[2]});
        ms.declared_bounds = sb;
    }

    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        const std::string p = "/tolerances";
        v.only_keys(t, p, {"ode", "tail", "quadrature", "reconstruction", "abel", "energy_drift"});
        cfg.tol.ode = v.number(t, p, "ode", cfg.tol.ode, true);
        cfg.tol.tail = v.number(t, p, "tail", cfg.tol.tail, true);
        cfg.tol.quadrature = v.number(t, p, "quadrature", cfg.tol.quadrature, true);
        cfg.tol.reconstruction = v.number(t, p, "reconstruction", cfg.tol.reconstruction, true);
        cfg.tol.abel = v.number(t, p, "abel", cfg.tol.abel, true);
        cfg.tol.energy_drift = v.number(t, p, "energy_drift", cfg.tol.energy_drift, true);
    }
    if (doc.contains("grids")) {
        const json& g = doc.at("grids");
        const std::string p = "/grids";
        v.only_keys(g, p, {"q_points_per_decade", "q_decades", "sigma_points", "s_points", "s_hi_factor"});
        cfg.grids.q_points_per_decade = v.integer(g, p, "q_points_per_decade", cfg.grids.q_points_per_decade, 4);
        cfg.grids.q_decades = v.number(g, p, "q_decades", cfg.grids.q_decades, true);
        if (cfg.grids.q_decades < 1.0) v.fail(p + "/q_decades", "must be at least 1 (the tail fit needs a decade)");
        cfg.grids.sigma_points = v.integer(g, p, "sigma_points", cfg.grids.sigma_points, 8);
        cfg.grids.s_points = v.integer(g, p, "s_points", cfg.grids.s_points, 2);
        cfg.grids.s_hi_factor = v.number(g, p, "s_hi_factor", cfg.grids.s_hi_factor, true);
        if (!(cfg.grids.s_hi_factor > 1.0)) v.fail(p + "/s_hi_factor", "must exceed 1");
    }
    if (doc.contains("simulate")) {
        const json& s = doc.at("simulate");
        const std::string p = "/simulate";
        v.only_keys(s, p, {"impacts", "runs", "boundary_samples"});
        if (s.contains("impacts")) {
            const json& a = s.at("impacts");
            if (!a.is_array()) v.fail(p + "/impacts", "expected an array of positive numbers");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string pi = p + "/impacts/" + std::to_string(i);
                if (!a[i].is_number() || !(a[i].get<double>() > 0.0) || !std::isfinite(a[i].get<double>()))
                    v.fail(pi, "impact parameter must be a positive number");
                cfg.impacts.push_back(a[i].get<double>());
            }
        }
        if (s.contains("runs")) {
            const json& a = s.at("runs");
            if (!a.is_array()) v.fail(p + "/runs", "expected an array of {v_minus, x_minus}");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string pr = p + "/runs/" + std::to_string(i);
                v.only_keys(a[i], pr, {"v_minus", "x_minus"});
                if (!a[i].contains("v_minus") || !a[i].contains("x_minus")) v.fail(pr, "needs v_minus and x_minus");
                IncomingRun run{v.vector(a[i].at("v_minus"), pr + "/v_minus", cfg.dimension),
                                v.vector(a[i].at("x_minus"), pr + "/x_minus", cfg.dimension)};
                cfg.runs.push_back(run);
            }
        }
        cfg.boundary_samples = v.integer(s, p, "boundary_samples", 0, 0);
    }

    // the energy shell and the physics preconditions, still before any output
    const EnergyContext ctx = cfg.energy();
    const double sp = ctx.speed_at_infinity();
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
        const double vn = cfg.runs[i].v_minus.norm();
        if (std::abs(vn - sp) > 1e-9 * sp) {
            std::ostringstream os;
            os.precision(17);
            os << "|v_minus| = " << vn << " is off the energy shell |v| = " << sp;
            v.fail("/simulate/runs/" + std::to_string(i) + "/v_minus", os.str());
        }
    }
    try {
        (void)cfg.field();
    } catch (const ValidationError& e) {
        v.fail("/model", e.what());
    }

    cfg.effective = doc;
    cfg.hash = sha256_hex(doc.dump());
    return cfg;
}

RunConfig load_config(const std::string& path, const std::string& regime_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path + ": cannot open config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, regime_override);
}

EnergyContext RunConfig::energy() const {
    EnergyContext ctx = regime == Regime::relativistic ? EnergyContext::relativistic(E, c)
                                                       : EnergyContext::nonrelativistic(E);
    ctx.validate();
    return ctx;
}

std::shared_ptr<const RadialProfile> RunConfig::profile() const {
    if (model.kind == "zero") return std::make_shared<ZeroProfile>(R, model.alpha);
    if (model.profile == "algebraic") return std::make_shared<AlgebraicProfile>(model.A, model.alpha, R);
    return std::make_shared<ShiftedPowerProfile>(model.A, model.alpha, R);
}

std::shared_ptr<const FieldModel> RunConfig::field() const {
    std::shared_ptr<FieldModel> f;
    if (model.kind == "zero") {
        f = std::make_shared<ZeroField>(dimension, model.alpha);
    } else {
        auto base = std::make_shared<RadialPotentialField>(dimension, profile(), model.smoothing_radius, R);
        if (model.kind == "magnetic_bump")
            f = std::make_shared<MagneticBumpField>(base, model.magnetic_amplitude, model.magnetic_cutoff);
        else
            f = base;
    }
    if (model.declared_bounds) f->declare_bounds(*model.declared_bounds);
    return f;
}

RadialScatteringContext RunConfig::radial_context() const {
    return make_radial_context(energy(), profile(), std::pow(10.0, grids.q_decades));
}

DeflectionGrid RunConfig::deflection_grid() const { return {grids.q_points_per_decade, grids.q_decades}; }

ShootOptions RunConfig::shoot_options() const {
    ShootOptions o;
    o.tol = tol.tail;
    o.ode_tol = tol.ode;
    return o;
}

}  // namespace invscat
