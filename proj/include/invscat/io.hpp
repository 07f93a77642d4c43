#pragma once

// CSV and JSON artifacts. Every file starts with '#' metadata lines
// (key = value), then a header row, then rows printed with 17 significant
// digits. JSON artifacts carry the same metadata under "meta".

#include "invscat/radial.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace invscat {

using Meta = std::vector<std::pair<std::string, std::string>>;

/// "%.17g"
std::string fmt17(double x);

struct CsvTable {
    Meta meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // one vector per column

    const std::string* meta_value(const std::string& key) const;
    /// Throws ValidationError naming the file when the column is absent.
    const std::vector<double>& column(const std::string& name) const;
    std::string origin;
};

/// Columns must have equal length. Written through a temporary file and renamed.
void write_csv(const std::string& path, const Meta& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& data);
CsvTable read_csv(const std::string& path);

void write_json(const std::string& path, const Meta& meta, nlohmann::json body);

/// Curve from a (q, g) CSV; regime, E, c, beta, alpha come from the metadata.
DeflectionCurve read_deflection_csv(const std::string& path);

}  // namespace invscat
