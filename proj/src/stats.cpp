#include "lemur/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lemur/error.hpp"
#include "lemur/hash.hpp"

namespace lemur::stats {

std::vector<AggRow> aggregate(std::span<const ResultRow> rows) {
  // Welford running moments per group.
  struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double duration_mean = 0.0;
  };
  std::map<GroupKey, Moments> groups;
  for (const ResultRow& r : rows) {
    Moments& m = groups[GroupKey{r.task, r.dataset, r.nn, r.epoch}];
    ++m.n;
    const double delta = r.accuracy - m.mean;
    m.mean += delta / static_cast<double>(m.n);
    m.m2 += delta * (r.accuracy - m.mean);
    m.duration_mean += (static_cast<double>(r.duration) - m.duration_mean) / static_cast<double>(m.n);
  }
  std::vector<AggRow> out;
  out.reserve(groups.size());
  for (const auto& [key, m] : groups) {
    double sd = m.n > 1 ? std::sqrt(std::max(0.0, m.m2 / static_cast<double>(m.n - 1))) : 0.0;
    out.push_back(AggRow{key, m.n, m.mean, sd, m.duration_mean});
  }
  return out;
}

std::vector<SeriesPoint> rolling_mean(std::span<const SeriesPoint> series, int window) {
  if (window < 1) throw std::invalid_argument("rolling window must be >= 1");
  std::vector<SeriesPoint> out;
  out.reserve(series.size());
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i > 0 && series[i].epoch <= series[i - 1].epoch) {
      throw std::invalid_argument("rolling_mean needs strictly increasing epochs");
    }
    const std::size_t begin = i + 1 >= w ? i + 1 - w : 0;
    // Incremental mean: exact on constant windows, never leaves [min, max].
    double mean = 0.0;
    for (std::size_t k = begin; k <= i; ++k) {
      mean += (series[k].value - mean) / static_cast<double>(k - begin + 1);
    }
    out.push_back(SeriesPoint{series[i].epoch, mean});
  }
  return out;
}

CorrMatrix pearson_matrix(std::span<const NamedColumn> columns) {
  CorrMatrix m;
  const std::size_t k = columns.size();
  if (k == 0) return m;
  const std::size_t n = columns.front().second.size();
  for (const auto& [name, values] : columns) {
    if (values.size() != n) throw LengthMismatch("column '" + name + "' has a different length");
    m.names.push_back(name);
  }
  if (n < 2) throw EmptyInput("correlation needs at least two samples");

  // Single pass co-moment update.
  std::vector<double> mean(k, 0.0);
  std::vector<std::vector<double>> co(k, std::vector<double>(k, 0.0));
  std::vector<double> delta(k);
  for (std::size_t s = 0; s < n; ++s) {
    const double count = static_cast<double>(s + 1);
    for (std::size_t i = 0; i < k; ++i) {
      delta[i] = columns[i].second[s] - mean[i];
      mean[i] += delta[i] / count;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double after = columns[i].second[s] - mean[i];
      for (std::size_t j = 0; j < k; ++j) co[i][j] += after * delta[j];
    }
  }

  m.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) {
        m.r[i][j] = 1.0;
        continue;
      }
      if (co[i][i] <= 0.0 || co[j][j] <= 0.0) continue;
      const double cov = 0.5 * (co[i][j] + co[j][i]);
      m.r[i][j] = std::clamp(cov / std::sqrt(co[i][i] * co[j][j]), -1.0, 1.0);
    }
  }
  return m;
}

std::vector<ResultRow> best_per_model(std::span<const ResultRow> rows) {
  std::vector<KeyedRow> keyed;
  keyed.reserve(rows.size());
  for (const ResultRow& r : rows) keyed.push_back(KeyedRow{r, prm_hash(r.prm), code_id(r.transform_code)});
  return select_best(std::move(keyed));
}

std::vector<Bin> histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw EmptyInput("histogram of no values");
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    constexpr double kWidth = 1e-9;
    lo -= 0.5 * kWidth * bins;
    hi += 0.5 * kWidth * bins;
  }
  const double width = (hi - lo) / bins;
  std::vector<Bin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)].lo = lo + b * width;
    out[static_cast<std::size_t>(b)].hi = b + 1 == bins ? hi : lo + (b + 1) * width;
  }
  for (double v : values) {
    auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * bins));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, bins - 1);
    ++out[static_cast<std::size_t>(idx)].count;
  }
  return out;
}

}  // namespace lemur::stats
