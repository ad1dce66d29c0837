#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kaczmarz/config.hpp"
#include "kaczmarz/dense.hpp"
#include "kaczmarz/trace.hpp"

#ifndef KACZMARZ_VERSION
#define KACZMARZ_VERSION "0.0.0"
#endif

namespace kaczmarz {

/// A named set of columns over a shared x axis (iteration for solver
/// traces, c for the coreset sweep).
struct Table {
  std::string name;
  std::string x_name = "iteration";
  Vector x;
  std::vector<std::string> columns;
  std::vector<Vector> values;  // values[c][row]

  std::size_t rows() const noexcept { return x.size(); }

  const Vector& column(std::string_view col) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == col) return values[c];
    throw Error(ErrorCode::InvalidArgument, "table '" + name + "' has no column '" + std::string(col) + "'");
  }

  void add_column(std::string col, Vector v) {
    detail::require(v.size() == x.size(), ErrorCode::DimensionMismatch, "column length != row count");
    columns.push_back(std::move(col));
    values.push_back(std::move(v));
  }
};

/// Converts a solver trace to a table with the trace CSV column names.
inline Table trace_table(std::string name, const IterationTrace& trace) {
  Table t;
  t.name = std::move(name);
  for (std::size_t k : trace.iterations) t.x.push_back(static_cast<double>(k));
  if (trace.has_approximation_error()) t.add_column("approx_error", trace.approximation_error);
  if (trace.has_chebyshev_error()) t.add_column("cheb_error", trace.chebyshev_error);
  if (trace.has_accuracy()) t.add_column("accuracy", trace.accuracy);
  for (std::size_t j = 0; j < trace.singular_error_count(); ++j) {
    Vector col;
    col.reserve(trace.size());
    for (const auto& row : trace.singular_errors) col.push_back(row[j]);
    t.add_column("sing_err_" + std::to_string(j + 1), std::move(col));
  }
  return t;
}

inline double median_of(Vector v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Cell-wise mean (or median) over trials; all tables must share x and columns.
inline Table aggregate_tables(const std::vector<Table>& trials, Aggregate mode = Aggregate::Mean) {
  detail::require(!trials.empty(), ErrorCode::InvalidArgument, "nothing to aggregate");
  Table out = trials.front();
  for (const Table& t : trials)
    detail::require(t.x == out.x && t.columns == out.columns, ErrorCode::DimensionMismatch,
                    "trial tables for '" + out.name + "' are not aligned");
  Vector cell(trials.size());
  for (std::size_t c = 0; c < out.columns.size(); ++c)
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t t = 0; t < trials.size(); ++t) cell[t] = trials[t].values[c][r];
      out.values[c][r] = mode == Aggregate::Mean ? mean_of(cell) : median_of(cell);
    }
  return out;
}

struct PlotSeries {
  std::string table;
  std::string column;
  std::string label;
};

struct Plot {
  std::string name;  // file is plot_<name>.svg
  std::string title;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

struct Summary {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentReport {
  std::string experiment;
  Json config;
  std::vector<Table> traces;                    // aggregated, one per variant
  std::vector<std::vector<Table>> trial_traces;  // [variant][trial]
  Summary summary;
  std::vector<Plot> plots;
  std::map<std::string, Vector> scalars;  // per-trial scalar results, for callers

  const Table& trace(std::string_view name) const {
    for (const Table& t : traces)
      if (t.name == name) return t;
    throw Error(ErrorCode::InvalidArgument, "report has no trace '" + std::string(name) + "'");
  }
};

inline Json provenance(const ExperimentConfig& config) {
  return Json{{"experiment", config.experiment},
              {"seed", config.seed},
              {"trials", config.trials},
              {"version", std::string("kaczmarz-v") + KACZMARZ_VERSION}};
}

inline void write_table_csv(std::ostream& out, const Table& t) {
  out << t.x_name;
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double x = t.x[r];
    if (x == std::floor(x) && std::abs(x) < 1e15)
      out << static_cast<long long>(x);
    else
      out << format_double(x);
    for (const auto& col : t.values) out << ',' << format_double(col[r]);
    out << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const Summary& s) {
  for (std::size_t i = 0; i < s.header.size(); ++i) out << (i ? "," : "") << s.header[i];
  out << '\n';
  for (const auto& row : s.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
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

}  // namespace detail

/// Polyline chart, fixed layout, no timestamps. Non-positive values are
/// dropped from log-scale series.
inline void write_svg_plot(std::ostream& out, const Plot& plot, const ExperimentReport& report) {
  constexpr double width = 720, height = 440, left = 80, right = 200, top = 40, bottom = 50;
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  const double pw = width - left - right, ph = height - top - bottom;

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  auto usable = [&](double y) { return std::isfinite(y) && (!plot.log_y || y > 0.0); };
  std::string x_name = "x";
  for (const auto& s : plot.series) {
    const Table& t = report.trace(s.table);
    x_name = t.x_name;
    const Vector& ys = t.column(s.column);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (!usable(ys[r])) continue;
      x_lo = std::min(x_lo, t.x[r]);
      x_hi = std::max(x_hi, t.x[r]);
      y_lo = std::min(y_lo, ty(ys[r]));
      y_hi = std::max(y_hi, ty(ys[r]));
    }
  }
  if (!(x_lo <= x_hi)) x_lo = 0, x_hi = 1;
  if (!(y_lo <= y_hi)) y_lo = 0, y_hi = 1;
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  if (plot.log_y) y_lo = std::floor(y_lo), y_hi = std::ceil(y_hi);
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << detail::xml_escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    out << "<text x=\"" << detail::fixed(px(xv)) << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n";
  }
  const int y_ticks = plot.log_y ? static_cast<int>(y_hi - y_lo) : 4;
  const int y_step = std::max(1, y_ticks / 8);
  for (int i = 0; i <= y_ticks; i += y_step) {
    const double yv = y_lo + (y_hi - y_lo) * i / std::max(1, y_ticks);
    const std::string label = plot.log_y ? "1e" + std::to_string(static_cast<int>(std::lround(yv)))
                                         : detail::tick_label(yv);
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << detail::fixed(py(yv)) << "\" y2=\""
        << detail::fixed(py(yv)) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << detail::fixed(py(yv) + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
      << detail::xml_escape(x_name) << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << detail::xml_escape(plot.y_label) << (plot.log_y ? " (log)" : "")
      << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const Table& t = report.trace(s.table);
    const Vector& ys = t.column(s.column);
    const char* color = palette[k % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (!usable(ys[r])) continue;
      out << (first ? "" : " ") << detail::fixed(px(t.x[r])) << ',' << detail::fixed(py(ty(ys[r])));
      first = false;
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly - 4 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly << "\">" << detail::xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

/// Writes trace_<variant>.csv, summary.csv, config_echo.json and
/// plot_<name>.svg into `dir`; with `keep_trials` also
/// trials/trace_<variant>_trial<t>.csv.
inline std::vector<std::filesystem::path> emit_artifacts(const ExperimentReport& report,
                                                         const std::filesystem::path& dir, bool keep_trials = false) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<fs::path> written;
  auto open = [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
    written.push_back(p);
    return out;
  };
  auto close = [&](std::ofstream& out, const fs::path& p) {
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + p.string() + "'");
  };

  for (const Table& t : report.traces) {
    const fs::path p = dir / ("trace_" + t.name + ".csv");
    auto out = open(p);
    write_table_csv(out, t);
    close(out, p);
  }
  {
    const fs::path p = dir / "summary.csv";
    auto out = open(p);
    write_summary_csv(out, report.summary);
    close(out, p);
  }
  {
    const fs::path p = dir / "config_echo.json";
    auto out = open(p);
    out << report.config.dump(2) << '\n';
    close(out, p);
  }
  for (const Plot& plot : report.plots) {
    const fs::path p = dir / ("plot_" + plot.name + ".svg");
    auto out = open(p);
    write_svg_plot(out, plot, report);
    close(out, p);
  }
  if (keep_trials) {
    const fs::path tdir = dir / "trials";
    fs::create_directories(tdir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + tdir.string() + "': " + ec.message());
    for (const auto& variant : report.trial_traces)
      for (std::size_t t = 0; t < variant.size(); ++t) {
        const fs::path p = tdir / ("trace_" + variant[t].name + "_trial" + std::to_string(t) + ".csv");
        auto out = open(p);
        write_table_csv(out, variant[t]);
        close(out, p);
      }
  }
  return written;
}

}  // namespace kaczmarz
