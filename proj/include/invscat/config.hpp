#pragma once

// Run configuration: one JSON document, validated in full before anything
// is computed or written. Errors carry "file:line:" of the offending key.

#include "invscat/fields.hpp"
#include "invscat/radial.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace invscat {

struct ModelSpec {
    std::string kind = "radial";           // zero | radial | magnetic_bump
    std::string profile = "shifted_power"; // shifted_power | algebraic
    double A = 1.0;
    double alpha = 2.0;
    double smoothing_radius = 0.5;
    double magnetic_amplitude = 0.0;
    double magnetic_cutoff = 0.0;
    std::optional<ShortRangeBounds> declared_bounds;
};

struct Tolerances {
    double ode = 1e-11;
    double tail = 1e-9;
    double quadrature = 1e-12;
    double reconstruction = 1e-3;  // sup relative error of W on (beta', hi beta')
    double abel = 1e-6;
    double energy_drift = 1e-9;
};

struct Grids {
    int q_points_per_decade = 96;
    double q_decades = 2.0;
    int sigma_points = 128;
    int s_points = 200;
    double s_hi_factor = 5.0;
};

struct IncomingRun {
    Vec v_minus, x_minus;
};

struct RunConfig {
    Regime regime = Regime::nonrelativistic;
    double E = 10.0;
    double c = 0.0;  // relativistic only
    int dimension = 2;
    double R = 1.0;  // the profile is exact beyond R
    ModelSpec model;
    Tolerances tol;
    Grids grids;
    std::vector<double> impacts;      // planar family runs for `simulate`
    std::vector<IncomingRun> runs;    // explicit asymptotes for `simulate`
    int boundary_samples = 0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    nlohmann::json effective;  // the validated document, overrides applied
    std::string hash;          // sha256 of effective.dump()

    EnergyContext energy() const;
    std::shared_ptr<const RadialProfile> profile() const;
    std::shared_ptr<const FieldModel> field() const;
    RadialScatteringContext radial_context() const;
    DeflectionGrid deflection_grid() const;
    ShootOptions shoot_options() const;
};

/// Parses and validates; `origin` prefixes error messages.
/// `regime_override` is "nonrel", "rel" or empty.
RunConfig parse_config(const std::string& text, const std::string& origin,
                       const std::string& regime_override = "");
RunConfig load_config(const std::string& path, const std::string& regime_override = "");

std::string sha256_hex(const std::string& data);

}  // namespace invscat
