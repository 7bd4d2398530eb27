#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lemur/registry.hpp"
#include "lemur/stats.hpp"

namespace lemur::report {

enum class PlotKind {
  scatter_acc_epoch,
  scatter_acc_duration,
  line_acc_time,
  box_acc_epoch,
  histogram_acc,
  rolling_mean,
  mean_std_band,
  corr_heatmap,
  duration_distribution,
};

std::string_view to_string(PlotKind kind);
std::optional<PlotKind> plot_kind_from(std::string_view name);
std::span<const PlotKind> all_plot_kinds();

// One named group of equally long data vectors.
//
// Columns per kind:
//   scatter_*, line_acc_time, rolling_mean   x, y
//   mean_std_band                            x, mean, std
//   box_acc_epoch                            value (one box per series)
//   histogram_acc, duration_distribution     value (bins shared by series;
//                                            durations in ns)
//   corr_heatmap                             r (one matrix row per series,
//                                            NaN marks an undefined entry)
struct Series {
  std::string name;
  std::map<std::string, std::vector<double>> columns;
};

struct PlotSpec {
  PlotKind kind = PlotKind::scatter_acc_epoch;
  std::vector<Series> series;
  std::string title;
  std::string x_label;
  std::string y_label;
  int bins = stats::kDefaultBins;
  int window = stats::kDefaultRollingWindow;
};

// Throws EmptySeries when there is no data point, std::invalid_argument
// when required columns are missing or ragged.
void validate(const PlotSpec& spec);

// Every data mark carries class="mark": one per point for scatter, line,
// rolling and band kinds, one box per series, one bar per bin and series,
// one cell per matrix entry.
std::size_t expected_mark_count(const PlotSpec& spec);

std::string render_svg(const PlotSpec& spec);

// Builds the standard chart of `kind` from stored rows, one series per
// model unless the kind groups otherwise (box plots group by epoch).
PlotSpec plot_from_rows(PlotKind kind, std::span<const ResultRow> rows);

// Tukey box statistics with linearly interpolated quartiles.
struct BoxStats {
  double q1 = 0, median = 0, q3 = 0;
  double whisker_lo = 0, whisker_hi = 0;
  std::vector<double> outliers;
};

// Linear interpolation between closest ranks, q in [0, 1].
double quantile(std::span<const double> sorted, double q);
BoxStats box_stats(std::span<const double> values);

// RFC 4180 with CRLF line ends; header is the query column list and the
// prm column uses the sorted `key=value;...` form.
void write_csv(std::span<const ResultRow> rows, std::ostream& out);
std::vector<ResultRow> read_csv(std::istream& in);
// Throws IoError.
void export_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);

using Cell = std::variant<std::string, double, std::int64_t>;

struct Sheet {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

struct WorkbookSpec {
  enum class Mode { aggregated, raw };
  Mode mode = Mode::aggregated;
  std::vector<Sheet> sheets;
  std::vector<std::string> plot_manifest;
};

// "summary" holds the aggregate rows, "plots" the manifest.
WorkbookSpec aggregated_workbook(std::span<const stats::AggRow> rows, std::vector<std::string> manifest);
// "raw" holds the result rows, "plots" the manifest.
WorkbookSpec raw_workbook(std::span<const ResultRow> rows, std::vector<std::string> manifest);

// Minimal XLSX package (stored ZIP, inline strings). Throws EmptyWorkbook
// when no sheet has data rows, std::invalid_argument for bad sheet names,
// IoError when the file cannot be written.
void export_workbook(const WorkbookSpec& w, const std::filesystem::path& path);

// Longest text a spreadsheet cell accepts.
inline constexpr std::size_t kMaxCellChars = 32767;

}  // namespace lemur::report
