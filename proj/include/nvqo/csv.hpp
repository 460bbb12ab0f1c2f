#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace nvqo {

/// Round-trippable decimal form of a double (17 significant digits).
std::string format_double(double v);

/// Comma-separated table with a mandatory header row.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header);

    /// Cells are formatted with format_double.
    void add_row(const std::vector<double>& values);
    /// Pre-formatted cells, for mixed text and numbers.
    void add_row_text(std::vector<std::string> cells);

    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    void write(std::ostream& out) const;
    void save(const std::string& path) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

ParsedCsv read_csv(const std::string& path);

}  // namespace nvqo
