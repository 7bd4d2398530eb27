#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lemur/registry.hpp"

namespace lemur::stats {

struct GroupKey {
  std::string task;
  std::string dataset;
  std::string nn;
  int epoch = 0;

  friend bool operator==(const GroupKey&, const GroupKey&) = default;
  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct AggRow {
  GroupKey key;
  std::size_t n = 0;
  double mean = 0.0;
  // Sample standard deviation; 0 for singleton groups.
  double std = 0.0;
  double mean_duration_ns = 0.0;
};

// Groups by (task, dataset, nn, epoch), sorted by that key.
std::vector<AggRow> aggregate(std::span<const ResultRow> rows);

struct SeriesPoint {
  int epoch = 0;
  double value = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

inline constexpr int kDefaultRollingWindow = 5;
inline constexpr int kDefaultBins = 20;

// Trailing mean over min(window, i + 1) points.
std::vector<SeriesPoint> rolling_mean(std::span<const SeriesPoint> series, int window = kDefaultRollingWindow);

struct CorrMatrix {
  std::vector<std::string> names;
  // nullopt where a column has zero variance.
  std::vector<std::vector<std::optional<double>>> r;
};

using NamedColumn = std::pair<std::string, std::vector<double>>;

// Throws LengthMismatch for ragged input and EmptyInput for fewer than two
// samples.
CorrMatrix pearson_matrix(std::span<const NamedColumn> columns);

// Same selection and tie breaking as the registry's best-accuracy query.
std::vector<ResultRow> best_per_model(std::span<const ResultRow> rows);

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over [min, max], last bin closed on the right. All-equal
// input is spread over bins of width 1e-9 centred on the value.
std::vector<Bin> histogram(std::span<const double> values, int bins = kDefaultBins);

inline double ns_to_seconds(double ns) { return ns * 1e-9; }

}  // namespace lemur::stats
