#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace cli {

/// Table with a header row; numbers are written with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

std::string format_number(double x);
/// RFC-4180 quoting of one field.
std::string csv_field(const std::string& s);

/// Sorted keys, floating point at 17 significant digits, non-finite as null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Column of a CSV file with a header row.
std::vector<double> read_csv_column(const std::string& path, const std::string& column);

/// Files of one run, kept in memory until the whole run has succeeded.
struct RunOutput {
    std::map<std::string, std::string> files;
    nlohmann::json summary = nlohmann::json::object();
};

/// Creates `dir` and writes every file. Throws std::runtime_error on failure.
void write_files(const std::string& dir, const std::map<std::string, std::string>& files);

}  // namespace cli
