#include "mgs/io/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mgs/common.hpp"
#include "mgs/io/dataset.hpp"

namespace mgs::io {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* const kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e9) return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
}

std::string no_data(const std::string& title) {
  std::ostringstream o;
  open_svg(o, title);
  o << "<text class=\"no-data\" x=\"" << fmt(kWidth / 2) << "\" y=\"" << fmt(kHeight / 2)
    << "\" text-anchor=\"middle\" fill=\"#888888\">no data</text>\n</svg>\n";
  return o.str();
}

// Shared frame: axes, y ticks, legend. Returns the y scale (pixels per unit).
double frame(std::ostringstream& o, double ymax, const std::vector<Series>& series) {
  const double plot_h = kHeight - kTop - kBottom;
  const double y0 = kHeight - kBottom;
  o << "<line class=\"x-axis\" x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(kWidth - kRight)
    << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
  o << "<line class=\"y-axis\" x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
    << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = ymax * i / 4.0;
    double y = y0 - plot_h * i / 4.0;
    o << "<line x1=\"" << fmt(kLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << label(v)
      << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    double y = kTop + 14.0 * static_cast<double>(s);
    o << "<rect x=\"" << fmt(kWidth - kRight - 110) << "\" y=\"" << fmt(y) << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[s % 6] << "\"/>\n";
    o << "<text x=\"" << fmt(kWidth - kRight - 96) << "\" y=\"" << fmt(y + 9) << "\">" << escape(series[s].name)
      << "</text>\n";
  }
  return plot_h / ymax;
}

double series_max(const std::vector<Series>& series) {
  double m = 0.0;
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) m = std::max(m, v);
  return m > 0.0 ? m : 1.0;
}

void bars(std::ostringstream& o, const std::vector<Series>& series, std::size_t groups, double scale,
          const std::vector<std::string>& group_labels) {
  const double plot_w = kWidth - kLeft - kRight;
  const double y0 = kHeight - kBottom;
  const double group_w = plot_w / static_cast<double>(groups);
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  const std::size_t label_every = std::max<std::size_t>(1, (groups + 19) / 20);
  for (std::size_t s = 0; s < series.size(); ++s) {
    o << "<g class=\"series\" data-name=\"" << escape(series[s].name) << "\" fill=\"" << kPalette[s % 6] << "\">\n";
    for (std::size_t g = 0; g < groups; ++g) {
      double v = g < series[s].values.size() ? series[s].values[g] : 0.0;
      if (!std::isfinite(v) || v <= 0.0) continue;
      double x = kLeft + group_w * static_cast<double>(g) + group_w * 0.1 + bar_w * static_cast<double>(s);
      double h = v * scale;
      o << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y0 - h) << "\" width=\"" << fmt(bar_w) << "\" height=\""
        << fmt(h) << "\"/>\n";
    }
    o << "</g>\n";
  }
  for (std::size_t g = 0; g < groups; g += label_every) {
    double x = kLeft + group_w * (static_cast<double>(g) + 0.5);
    o << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y0 + 16) << "\" text-anchor=\"middle\">"
      << escape(group_labels[g]) << "</text>\n";
  }
}

}  // namespace

int Table::find(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::column(const std::string& name) const {
  int c = find(name);
  if (c < 0) throw IoError("report has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

Table read_table(const std::filesystem::path& path) {
  Table t;
  Matrix m = read_matrix_csv(path, &t.header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string paired_histogram_svg(const std::string& title, const std::vector<double>& bins,
                                 const std::vector<Series>& series) {
  if (bins.empty() || series.empty()) return no_data(title);
  std::ostringstream o;
  open_svg(o, title);
  double scale = frame(o, series_max(series), series);
  std::vector<std::string> labels;
  for (double b : bins) labels.push_back(label(b));
  bars(o, series, bins.size(), scale, labels);
  o << "<text x=\"" << fmt(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << fmt(kHeight - 12)
    << "\" text-anchor=\"middle\">k (generated neighbours per real sample)</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series) {
  if (categories.empty() || series.empty()) return no_data(title);
  std::ostringstream o;
  open_svg(o, title);
  double scale = frame(o, series_max(series), series);
  bars(o, series, categories.size(), scale, categories);
  o << "</svg>\n";
  return o.str();
}

std::string render_report(const Table& table, const std::string& title) {
  bool proportions = table.find("mode") >= 0;
  std::vector<std::string> need = proportions
                                      ? std::vector<std::string>{"mode", "training", "uniform", "unguided", "guided"}
                                      : std::vector<std::string>{"k", "unguided", "guided"};
  std::string missing;
  for (const auto& c : need)
    if (table.find(c) < 0) missing += (missing.empty() ? "" : ", ") + c;
  if (!missing.empty()) throw IoError("report '" + title + "' is missing columns: " + missing);

  if (proportions) {
    std::vector<std::string> cats;
    for (double m : table.column("mode")) cats.push_back("mode " + label(m));
    std::vector<Series> s;
    for (const char* name : {"training", "uniform", "unguided", "guided"}) s.push_back({name, table.column(name)});
    return bar_chart_svg(title, cats, s);
  }
  return paired_histogram_svg(title, table.column("k"),
                              {{"unguided", table.column("unguided")}, {"guided", table.column("guided")}});
}

void plot_report(const std::filesystem::path& csv, const std::filesystem::path& svg) {
  auto text = render_report(read_table(csv), csv.stem().string());
  if (svg.has_parent_path()) std::filesystem::create_directories(svg.parent_path());
  std::ofstream out(svg, std::ios::binary);
  if (!out) throw IoError("cannot open '" + svg.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + svg.string() + "'");
}

}  // namespace mgs::io
