#include "glassform/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glassform/error.hpp"

namespace glassform::io {

std::string format_double(double v) {
    // shortest round-trip representation
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    return std::string(buf, end);
}

const std::vector<double>& Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns.at(i);
    throw ValidationError("table has no column '" + name + "'");
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out += ',';
        out += table.header[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(table.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void write_csv(const std::filesystem::path& path, const Table& table) { write_text(path, to_csv(table)); }

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

}  // namespace

Table read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty CSV");
    Table t;
    t.header = split(line);
    if (!expected_header.empty() && t.header != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw ValidationError(path.string() + ": unexpected CSV header, want " + want);
    }
    t.columns.assign(t.header.size(), {});
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const char* b = cells[c].data();
            auto [p, ec] = std::from_chars(b, b + cells[c].size(), v);
            if (ec != std::errc{} || p != b + cells[c].size())
                throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                                      cells[c] + "'");
            t.columns[c].push_back(v);
        }
    }
    return t;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

}  // namespace glassform::io
