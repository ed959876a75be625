#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bragg/errors.hpp"

namespace cli {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values)
{
    if (values.size() != header_.size()) throw std::logic_error("CSV row width mismatch");
    rows_.push_back(values);
}

std::string CsvTable::str() const
{
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += csv_field(header_[i]);
    }
    out += "\r\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += format_number(r[i]);
        }
        out += "\r\n";
    }
    return out;
}

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

void dump(const nlohmann::json& j, int indent, int depth, std::string& out)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: already sorted
            if (!first) out += ",\n";
            first = false;
            out += pad + nlohmann::json(it.key()).dump() + ": ";
            dump(it.value(), indent, depth + 1, out);
        }
        out += "\n" + close + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump(j[i], indent, depth + 1, out);
        }
        out += "\n" + close + "]";
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            out += "null";
            return;
        }
        std::string s = format_number(x);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        out += s;
        return;
    }
    default:
        out += j.dump();
    }
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent)
{
    std::string out;
    dump(j, indent, 0, out);
    return out + "\n";
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column)
{
    std::ifstream in(path);
    if (!in) throw bragg::ConfigError("allan.input: cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw bragg::ConfigError("allan.input: '" + path + "' is empty");
    const auto header = split_csv_line(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) col = i;
    if (col == header.size())
        throw bragg::ConfigError("allan.column: no column '" + column + "' in '" + path + "'");
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (col >= f.size())
            throw bragg::ConfigError("allan.input: row " + std::to_string(row) + " is short");
        try {
            std::size_t used = 0;
            values.push_back(std::stod(f[col], &used));
            if (used != f[col].size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw bragg::ConfigError("allan.input: row " + std::to_string(row) + ": '" + f[col] +
                                     "' is not a number");
        }
    }
    return values;
}

void write_files(const std::string& dir, const std::map<std::string, std::string>& files)
{
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
        const auto path = std::filesystem::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

}  // namespace cli
