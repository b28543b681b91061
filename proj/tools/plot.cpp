#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lvn/error.hpp"
#include "lvn/format.hpp"

namespace lvn::report {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::size_t Csv::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("csv has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

Csv read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read " + path.string());
  Csv csv;
  std::string line;
  if (!std::getline(is, line)) throw DataError(path.string() + ": empty file");
  csv.header = split_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != csv.header.size()) throw DataError(path.string() + ": ragged row '" + line + "'");
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

std::vector<Series> series_from_csv(const Csv& csv, const std::string& x_col, const std::string& y_col,
                                    const std::string& group_col) {
  const std::size_t xi = csv.column(x_col), yi = csv.column(y_col);
  const std::size_t gi = group_col.empty() ? 0 : csv.column(group_col);
  std::map<std::string, Series> groups;
  std::vector<std::string> order;
  for (const auto& row : csv.rows) {
    if (row[yi].empty()) continue;
    const std::string key = group_col.empty() ? y_col : group_col + " " + row[gi];
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) {
      it->second.name = key;
      order.push_back(key);
    }
    try {
      it->second.xs.push_back(std::stod(row[xi]));
      it->second.ys.push_back(std::stod(row[yi]));
    } catch (const std::exception&) {
      throw DataError("non-numeric cell in columns " + x_col + "/" + y_col);
    }
  }
  std::vector<Series> out;
  for (const auto& k : order) out.push_back(std::move(groups[k]));
  return out;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double x : s.xs) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (double y : s.ys) y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << W << R"(" height=")" << H << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  os << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  os << R"(<text x=")" << W / 2 << R"(" y="22" text-anchor="middle" font-size="15">)" << escape(title) << "</text>\n";
  os << R"(<rect x=")" << L << R"(" y=")" << T << R"(" width=")" << pw << R"(" height=")" << ph
     << R"(" fill="none" stroke="black"/>)" << '\n';
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
    os << R"(<text x=")" << px(fx) << R"(" y=")" << T + ph + 16 << R"(" text-anchor="middle">)" << format_real(std::round(fx * 1000) / 1000) << "</text>\n";
    os << R"(<text x=")" << L - 6 << R"(" y=")" << py(fy) + 4 << R"(" text-anchor="end">)" << format_real(std::round(fy * 1000) / 1000) << "</text>\n";
  }
  os << R"(<text x=")" << L + pw / 2 << R"(" y=")" << H - 10 << R"(" text-anchor="middle">)" << escape(x_label) << "</text>\n";
  os << R"(<text x="16" y=")" << T + ph / 2 << R"x(" text-anchor="middle" transform="rotate(-90 16 )x" << T + ph / 2
     << R"x()">)x" << escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    os << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="1.5" points=")";
    for (std::size_t k = 0; k < series[i].xs.size(); ++k) os << (k ? " " : "") << px(series[i].xs[k]) << ',' << py(series[i].ys[k]);
    os << "\"/>\n";
    const double ly = T + 14 + 16 * static_cast<double>(i);
    os << R"(<line x1=")" << W - R + 10 << R"(" y1=")" << ly - 4 << R"(" x2=")" << W - R + 28 << R"(" y2=")" << ly - 4
       << R"(" stroke=")" << color << R"(" stroke-width="2"/>)" << '\n';
    os << R"(<text x=")" << W - R + 32 << R"(" y=")" << ly << R"(">)" << escape(series[i].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace lvn::report
