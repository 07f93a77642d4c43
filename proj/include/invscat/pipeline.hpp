#pragma once

// The four batch commands. Each computes everything in memory first and
// writes its artifacts only once the computation has succeeded.

#include "invscat/config.hpp"
#include "invscat/io.hpp"

#include <string>
#include <vector>

namespace invscat {

struct CommandResult {
    bool passed = true;                // roundtrip verdict; always true otherwise
    std::vector<std::string> files;    // written artifacts, in order
    std::string message;
};

enum class DeflectionSource { quadrature, map };
DeflectionSource parse_source(const std::string& s);

/// config_sha256, artifact name and the constants E, c, alpha, beta, beta',
/// C_E, R_E (nan where a constant is not defined at this energy).
Meta constants_block(const RunConfig& cfg, const std::string& artifact);

CommandResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir);
CommandResult cmd_deflect(const RunConfig& cfg, const std::string& out_dir, DeflectionSource src);
CommandResult cmd_reconstruct(const RunConfig& cfg, const std::string& out_dir, const std::string& deflection_csv);
CommandResult cmd_roundtrip(const RunConfig& cfg, const std::string& out_dir, DeflectionSource src);

}  // namespace invscat
