// invscat: batch driver for simulate / deflect / reconstruct / roundtrip.
// Exit codes: 0 ok, 1 validation error, 2 numerical failure, 3 roundtrip FAIL.

#include "invscat/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace invscat;

namespace {

enum Exit { ok = 0, validation = 1, numerical = 2, acceptance = 3 };

void report(const CommandResult& r) {
    for (const auto& f : r.files) std::cout << f << "\n";
    if (!r.message.empty()) std::cout << (r.passed ? "PASS: " : "FAIL: ") << r.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical inverse scattering: simulate, deflect, reconstruct, roundtrip"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, out_dir, source = "quadrature", regime, deflection;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (default: the config's \"output\")");
    app.add_option("--source", source, "deflection source for deflect/roundtrip")
        ->check(CLI::IsMember({"quadrature", "map"}));
    app.add_option("--regime", regime, "override the config's regime")->check(CLI::IsMember({"nonrel", "rel"}));

    auto* sim = app.add_subcommand("simulate", "trajectories, asymptotes and boundary data");
    auto* def = app.add_subcommand("deflect", "deflection curve g(q) on [beta, q_max]");
    auto* rec = app.add_subcommand("reconstruct", "W from a deflection CSV");
    rec->add_option("--deflection", deflection, "deflection CSV (default: OUT/deflection.csv)");
    auto* rt = app.add_subcommand("roundtrip", "deflect + reconstruct + checks against tolerances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : validation;
    }

    try {
        const RunConfig cfg = load_config(config_path, regime);
        if (out_dir.empty()) out_dir = cfg.output_dir;
        CommandResult r;
        if (*sim) r = cmd_simulate(cfg, out_dir);
        else if (*def) r = cmd_deflect(cfg, out_dir, parse_source(source));
        else if (*rec) {
            if (deflection.empty()) deflection = (std::filesystem::path(out_dir) / "deflection.csv").string();
            r = cmd_reconstruct(cfg, out_dir, deflection);
        } else if (*rt) {
            r = cmd_roundtrip(cfg, out_dir, parse_source(source));
        }
        report(r);
        return r.passed ? ok : acceptance;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return numerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    }
}
