#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "jpa/errors.hpp"

namespace jpa::io {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add: row width does not match header");
    rows.push_back(std::move(row));
}

DeviceParams device_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("device: expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (key != "f0_hz" && key != "ic_a" && key != "q") throw ValidationError("device: unknown key '" + key + "'");
    auto field = [&](const char* key) {
        if (!j.contains(key)) throw ValidationError(std::string("device: missing key '") + key + "'");
        if (!j.at(key).is_number()) throw ValidationError(std::string("device: '") + key + "' must be a number");
        return j.at(key).get<double>();
    };
    DeviceParams d{field("f0_hz"), field("ic_a"), field("q")};
    validate(d);
    return d;
}

nlohmann::json device_to_json(const DeviceParams& d) {
    return {{"f0_hz", d.f0_hz}, {"ic_a", d.ic_a}, {"q", d.q}};
}

nlohmann::json derived_to_json(const DerivedParams& d) {
    return {{"omega0", d.omega0},         {"K", d.K},   {"gamma", d.gamma},
            {"Lj", d.Lj},                 {"Ej", d.Ej}, {"C", d.C},
            {"alpha_in_crit", d.alpha_in_crit},         {"kerr_ratio", d.kerr_ratio},
            {"alpha_in_crit_rel", d.alpha_in_crit_rel()}};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) return *d;
        return format_double(*d);
    }
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

}  // namespace

void write_csv(std::ostream& os, const Table& table, const nlohmann::json& metadata) {
    for (const auto& [key, value] : metadata.items()) os << "# " << key << ": " << value.dump() << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
        os << '\n';
    }
}

void write_json(std::ostream& os, const Table& table, const nlohmann::json& metadata) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    nlohmann::json doc{{"metadata", metadata}, {"columns", table.columns}, {"rows", std::move(rows)}};
    os << doc.dump(1) << '\n';
}

}  // namespace jpa::io
