#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lvn::report {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name. Throws DataError when absent.
  std::size_t column(const std::string& name) const;
};

/// Plain comma-separated file with a header line. Throws DataError.
Csv read_csv(const std::filesystem::path& path);

/// Static line chart with one polyline per series.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

/// One series per distinct value of `group_col` (a single series when empty).
/// Rows with an empty y cell are skipped.
std::vector<Series> series_from_csv(const Csv& csv, const std::string& x_col, const std::string& y_col,
                                    const std::string& group_col = "");

}  // namespace lvn::report
