#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace she::report {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// One output file: resolved configuration, data tables and a summary block.
struct Document {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<Table> tables;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

enum class Format { Csv, Json };

/// 17 significant digits; "nan"/"inf"/"-inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

/// CSV: '#'-prefixed header lines (artifact, version, command, config,
/// summary), then one section per table introduced by "# table: <name>".
void write_csv(const Document& doc, std::ostream& out);
void write_json(const Document& doc, std::ostream& out);
void write(const Document& doc, Format format, std::ostream& out);

/// Parses CSV produced by write_csv back into tables (values as strings).
[[nodiscard]] std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> read_csv_tables(std::istream& in);

} // namespace she::report
