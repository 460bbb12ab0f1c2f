#include "nvqo/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nvqo/error.hpp"

namespace nvqo {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw DomainError("CSV header must not be empty");
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row_text(std::move(cells));
}

void CsvTable::add_row_text(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw DimensionError("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
}

void CsvTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    write(out);
}

std::size_t ParsedCsv::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DomainError("CSV has no column '" + name + "'");
}

double ParsedCsv::number(std::size_t row, const std::string& name) const {
    const std::string& cell = rows.at(row).at(column(name));
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw DomainError("CSV cell '" + cell + "' is not a number");
    }
    return v;
}

ParsedCsv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    ParsedCsv out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            out.header = std::move(cells);
            first = false;
        } else {
            out.rows.push_back(std::move(cells));
        }
    }
    return out;
}

}  // namespace nvqo
