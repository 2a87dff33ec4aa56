#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mgs::io {

/// A numeric CSV report: header plus rows of doubles (`nan` allowed).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index, or -1.
  int find(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

Table read_table(const std::filesystem::path& path);

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Histograms of several series over the same integer bins, drawn as side by
/// side bars on one shared x-axis. Empty bins produce a "no data" chart.
std::string paired_histogram_svg(const std::string& title, const std::vector<double>& bins,
                                 const std::vector<Series>& series);

/// Grouped bar chart, one group per category.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series);

/// Renders a report CSV. Histogram reports need columns `k,unguided,guided`;
/// proportion reports (recognised by a `mode` column) need
/// `mode,training,uniform,unguided,guided`. Missing columns throw IoError
/// naming every one of them.
std::string render_report(const Table& table, const std::string& title);
void plot_report(const std::filesystem::path& csv, const std::filesystem::path& svg);

}  // namespace mgs::io
