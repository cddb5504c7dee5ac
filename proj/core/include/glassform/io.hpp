#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace glassform::io {

/// Shortest decimal text that parses back to the same double ("%.17g").
std::string format_double(double v);

/// Column-major numeric table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    /// Throws ValidationError when the header is missing.
    const std::vector<double>& column(const std::string& name) const;
};

std::string to_csv(const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

/// Parses a numeric CSV. When `expected_header` is non-empty it must match exactly.
Table read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header = {});

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace glassform::io
