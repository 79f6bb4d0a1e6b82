#include "she/report.hpp"

#include "she/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace she::report {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw ValidationError("table '" + name + "': row width does not match column count");
    rows.push_back(std::move(row));
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c))
        return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d))
            return nullptr;
        return *d;
    }
    if (const auto* i = std::get_if<long long>(&c))
        return *i;
    return std::get<std::string>(c);
}

void summary_lines(const nlohmann::ordered_json& node, const std::string& prefix, std::ostream& out)
{
    if (node.is_object()) {
        for (const auto& [key, value] : node.items())
            summary_lines(value, prefix.empty() ? key : prefix + "." + key, out);
        return;
    }
    std::string text;
    if (node.is_number_float())
        text = format_double(node.get<double>());
    else if (node.is_string())
        text = node.get<std::string>();
    else
        text = node.dump();
    out << "# summary: " << prefix << " = " << text << '\n';
}

} // namespace

void write_csv(const Document& doc, std::ostream& out)
{
    out << "# artifact: she-engine\n";
    out << "# version: " << SHE_VERSION << '\n';
    out << "# command: " << doc.command << '\n';
    for (const auto& [key, value] : doc.config)
        out << "# config: " << key << " = " << value << '\n';
    summary_lines(doc.summary, "", out);
    for (const auto& table : doc.tables) {
        out << "# table: " << table.name << '\n';
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            out << (i ? "," : "") << table.columns[i];
        out << '\n';
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << cell_text(row[i]);
            out << '\n';
        }
    }
}

void write_json(const Document& doc, std::ostream& out)
{
    nlohmann::ordered_json j;
    j["artifact"] = "she-engine";
    j["version"] = SHE_VERSION;
    j["command"] = doc.command;
    auto& config = j["config"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : doc.config)
        config[key] = value;
    j["summary"] = doc.summary;
    auto& tables = j["tables"] = nlohmann::ordered_json::object();
    for (const auto& table : doc.tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i)
                obj[table.columns[i]] = cell_json(row[i]);
            rows.push_back(std::move(obj));
        }
        tables[table.name] = std::move(rows);
    }
    out << j.dump(2) << '\n';
}

void write(const Document& doc, Format format, std::ostream& out)
{
    if (format == Format::Csv)
        write_csv(doc, out);
    else
        write_json(doc, out);
}

std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> read_csv_tables(std::istream& in)
{
    std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> tables;
    std::string line;
    const std::string marker = "# table: ";
    while (std::getline(in, line)) {
        if (line.rfind(marker, 0) == 0) {
            tables.emplace_back(line.substr(marker.size()), std::vector<std::vector<std::string>>{});
            continue;
        }
        if (line.empty() || line[0] == '#' || tables.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        tables.back().second.push_back(std::move(fields));
    }
    return tables;
}

} // namespace she::report
