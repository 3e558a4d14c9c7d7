#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "keyloco/pipeline/stages.hpp"

namespace keyloco::pipeline {

namespace {

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("plot: cannot open " + path);
  Csv csv;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("plot: empty csv " + path);
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != csv.columns.size())
      throw std::runtime_error("plot: ragged row in " + path);
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

int column_index(const Csv& csv, const std::string& name) {
  auto it = std::find(csv.columns.begin(), csv.columns.end(), name);
  if (it == csv.columns.end())
    throw std::runtime_error("plot: no column '" + name + "'");
  return static_cast<int>(it - csv.columns.begin());
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

void plot_csv(const std::string& csv_path, const std::string& x_column,
              const std::vector<std::string>& y_columns,
              const std::string& out_svg) {
  Csv csv = read_csv(csv_path);
  if (csv.rows.empty()) throw std::runtime_error("plot: no data rows in " + csv_path);
  int xi = column_index(csv, x_column);
  std::vector<int> yi;
  for (const auto& c : y_columns) yi.push_back(column_index(csv, c));

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& row : csv.rows) {
    xmin = std::min(xmin, row[xi]);
    xmax = std::max(xmax, row[xi]);
    for (int c : yi) {
      ymin = std::min(ymin, row[c]);
      ymax = std::max(ymax, row[c]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;

  constexpr double kW = 640, kH = 400, kMargin = 60;
  auto px = [&](double x) {
    return kMargin + (x - xmin) / (xmax - xmin) * (kW - 2 * kMargin);
  };
  auto py = [&](double y) {
    return kH - kMargin - (y - ymin) / (ymax - ymin) * (kH - 2 * kMargin);
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\""
      << kW - kMargin << "\" y2=\"" << kH - kMargin
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
      << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"" << kH - kMargin + 16
      << "\" font-size=\"11\" font-family=\"monospace\">" << num(xmin) << "</text>\n";
  svg << "<text x=\"" << kW - kMargin << "\" y=\"" << kH - kMargin + 16
      << "\" font-size=\"11\" font-family=\"monospace\" text-anchor=\"end\">"
      << num(xmax) << "</text>\n";
  svg << "<text x=\"" << kMargin - 4 << "\" y=\"" << kH - kMargin
      << "\" font-size=\"11\" font-family=\"monospace\" text-anchor=\"end\">"
      << num(ymin) << "</text>\n";
  svg << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 4
      << "\" font-size=\"11\" font-family=\"monospace\" text-anchor=\"end\">"
      << num(ymax) << "</text>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - kMargin + 32
      << "\" font-size=\"12\" font-family=\"monospace\" text-anchor=\"middle\">"
      << x_column << "</text>\n";

  for (size_t s = 0; s < yi.size(); ++s) {
    const char* color = kPalette[s % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t r = 0; r < csv.rows.size(); ++r) {
      if (r) svg << " ";
      svg << num(px(csv.rows[r][xi])) << "," << num(py(csv.rows[r][yi[s]]));
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kMargin + 4 << "\" y=\"" << kMargin + 14 * s + 10
        << "\" font-size=\"11\" font-family=\"monospace\" fill=\"" << color << "\">"
        << y_columns[s] << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(out_svg, std::ios::binary);
  if (!os) throw std::runtime_error("plot: cannot write " + out_svg);
  os << svg.str();
}

}  // namespace keyloco::pipeline
