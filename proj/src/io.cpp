#include "invscat/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace invscat {

namespace fs = std::filesystem;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::string* CsvTable::meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return &v;
    return nullptr;
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw ValidationError(origin + ": missing column '" + name + "'");
}

namespace {

void commit(const std::string& path, const std::string& body) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(path + ": cannot open for writing");
        out << body;
        if (!out) throw NumericalError(path + ": write failed");
    }
    fs::rename(tmp, p);
}

}  // namespace

void write_csv(const std::string& path, const Meta& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& data) {
    if (columns.size() != data.size()) throw InvariantViolation("write_csv: column/data count mismatch");
    const std::size_t rows = data.empty() ? 0 : data.front().size();
    for (const auto& col : data)
        if (col.size() != rows) throw InvariantViolation("write_csv: ragged columns");
    std::ostringstream os;
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
    os << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << fmt17(data[j][i]);
        os << "\n";
    }
    commit(path, os.str());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open");
    CsvTable t;
    t.origin = path;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            t.meta.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!have_header) {
            while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
            t.data.resize(t.columns.size());
            have_header = true;
            continue;
        }
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= t.columns.size())
                throw ValidationError(path + ":" + std::to_string(lineno) + ": too many fields");
            std::size_t used = 0;
            double x = 0.0;
            try {
                x = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw ValidationError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            t.data[j++].push_back(x);
        }
        if (j != t.columns.size())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.columns.size()) + " fields");
    }
    if (!have_header) throw ValidationError(path + ": no header row");
    return t;
}

void write_json(const std::string& path, const Meta& meta, nlohmann::json body) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    body["meta"] = m;
    commit(path, body.dump(2) + "\n");
}

DeflectionCurve read_deflection_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    auto need = [&](const char* key) -> const std::string& {
        const std::string* v = t.meta_value(key);
        if (!v) throw ValidationError(path + ": header lacks '" + key + "'");
        return *v;
    };
    auto num = [&](const char* key) {
        const std::string& s = need(key);
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ValidationError(path + ": header value of '" + key + "' is not a number: " + s);
        }
    };
    CurveMeta m;
    const std::string& reg = need("regime");
    if (reg == "rel") m.regime = Regime::relativistic;
    else if (reg == "nonrel") m.regime = Regime::nonrelativistic;
    else throw ValidationError(path + ": regime must be nonrel or rel, got " + reg);
    m.E = num("E");
    if (m.regime == Regime::relativistic) m.c = num("c");
    m.beta = num("beta");
    m.alpha = num("alpha");
    try {
        return DeflectionCurve(m, t.column("q"), t.column("g"));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace invscat
