#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sharp {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 400;
};

// Deterministic SVG line chart; one polyline per series with one vertex per
// point. Throws EmptyInputError when there is no series or a series has no
// points, ValidationError on mismatched x/y lengths or non-finite values.
std::string render_line_chart(const std::vector<Series>& series, const ChartSpec& spec);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Header line plus numeric rows of equal width. ParseError carries the line.
CsvTable read_numeric_csv(std::istream& in);
CsvTable read_numeric_csv(const std::filesystem::path& path);

// First column as x, every other column (or the named ones) as a series.
std::vector<Series> table_series(const CsvTable& table, const std::vector<std::string>& columns = {});

}  // namespace sharp
