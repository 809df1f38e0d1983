#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jpa/device_params.hpp"

namespace jpa::io {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

// {"f0_hz", "ic_a", "q"}; every key required, unknown keys rejected.
DeviceParams device_from_json(const nlohmann::json& j);
nlohmann::json device_to_json(const DeviceParams& d);
nlohmann::json derived_to_json(const DerivedParams& d);

nlohmann::json read_json_file(const std::string& path);

// 17 significant digits; inf / nan spelled out.
std::string format_double(double x);

// '#'-prefixed metadata lines (one per top-level key, compact JSON), then the
// header row and the data rows.
void write_csv(std::ostream& os, const Table& table, const nlohmann::json& metadata);
void write_json(std::ostream& os, const Table& table, const nlohmann::json& metadata);

}  // namespace jpa::io
