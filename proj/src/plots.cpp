#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "lemur/error.hpp"
#include "lemur/report.hpp"

namespace lemur::report {
namespace {

std::string model_label(const ResultRow& r) { return r.nn + " (" + r.dataset + ")"; }

std::vector<Series> per_model(std::span<const ResultRow> rows,
                              const std::function<void(Series&, const ResultRow&)>& add) {
  std::map<std::string, Series> groups;
  for (const ResultRow& r : rows) {
    Series& s = groups[model_label(r)];
    s.name = model_label(r);
    add(s, r);
  }
  std::vector<Series> out;
  for (auto& [name, s] : groups) out.push_back(std::move(s));
  return out;
}

std::vector<Series> aggregated(std::span<const ResultRow> rows, bool with_std) {
  std::map<std::string, Series> groups;
  for (const stats::AggRow& a : stats::aggregate(rows)) {
    const std::string name = a.key.nn + " (" + a.key.dataset + ")";
    Series& s = groups[name];
    s.name = name;
    s.columns["x"].push_back(a.key.epoch);
    s.columns[with_std ? "mean" : "y"].push_back(a.mean);
    if (with_std) s.columns["std"].push_back(a.std);
  }
  std::vector<Series> out;
  for (auto& [name, s] : groups) out.push_back(std::move(s));
  return out;
}

std::vector<Series> correlation(std::span<const ResultRow> rows) {
  std::vector<stats::NamedColumn> cols = {{"accuracy", {}}, {"epoch", {}}, {"duration_s", {}}};
  // Numeric hyperparameters present in every row.
  std::map<std::string, std::vector<double>> prm_cols;
  if (!rows.empty()) {
    for (const auto& [k, v] : rows.front().prm) {
      if (!std::holds_alternative<std::string>(v)) prm_cols[k];
    }
  }
  for (const ResultRow& r : rows) {
    cols[0].second.push_back(r.accuracy);
    cols[1].second.push_back(r.epoch);
    cols[2].second.push_back(stats::ns_to_seconds(static_cast<double>(r.duration)));
    for (auto it = prm_cols.begin(); it != prm_cols.end();) {
      auto p = r.prm.find(it->first);
      if (p == r.prm.end() || std::holds_alternative<std::string>(p->second)) {
        it = prm_cols.erase(it);
      } else {
        it->second.push_back(as_real(p->second));
        ++it;
      }
    }
  }
  for (auto& [k, v] : prm_cols) cols.emplace_back(k, std::move(v));
  const stats::CorrMatrix m = stats::pearson_matrix(cols);
  std::vector<Series> out;
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    Series s{m.names[i], {}};
    auto& r = s.columns["r"];
    for (const auto& cell : m.r[i]) r.push_back(cell.value_or(std::numeric_limits<double>::quiet_NaN()));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

PlotSpec plot_from_rows(PlotKind kind, std::span<const ResultRow> rows) {
  if (rows.empty()) throw EmptySeries("no rows to plot");
  PlotSpec spec;
  spec.kind = kind;
  spec.y_label = "accuracy";
  switch (kind) {
    case PlotKind::scatter_acc_epoch:
      spec.title = "Accuracy by epoch";
      spec.x_label = "epoch";
      spec.series = per_model(rows, [](Series& s, const ResultRow& r) {
        s.columns["x"].push_back(r.epoch);
        s.columns["y"].push_back(r.accuracy);
      });
      break;
    case PlotKind::scatter_acc_duration:
      spec.title = "Accuracy by epoch duration";
      spec.x_label = "duration (s)";
      spec.series = per_model(rows, [](Series& s, const ResultRow& r) {
        s.columns["x"].push_back(stats::ns_to_seconds(static_cast<double>(r.duration)));
        s.columns["y"].push_back(r.accuracy);
      });
      break;
    case PlotKind::line_acc_time:
      spec.title = "Mean accuracy over epochs";
      spec.x_label = "epoch";
      spec.series = aggregated(rows, false);
      break;
    case PlotKind::rolling_mean:
      spec.title = "Rolling mean accuracy";
      spec.x_label = "epoch";
      spec.series = aggregated(rows, false);
      break;
    case PlotKind::mean_std_band:
      spec.title = "Mean accuracy with one standard deviation";
      spec.x_label = "epoch";
      spec.series = aggregated(rows, true);
      break;
    case PlotKind::box_acc_epoch: {
      spec.title = "Accuracy distribution per epoch";
      spec.x_label = "epoch";
      std::map<int, Series> by_epoch;
      for (const ResultRow& r : rows) {
        Series& s = by_epoch[r.epoch];
        s.name = "epoch " + std::to_string(r.epoch);
        s.columns["value"].push_back(r.accuracy);
      }
      for (auto& [e, s] : by_epoch) spec.series.push_back(std::move(s));
      break;
    }
    case PlotKind::histogram_acc:
      spec.title = "Accuracy histogram";
      spec.x_label = "accuracy";
      spec.y_label = "count";
      spec.series = per_model(rows, [](Series& s, const ResultRow& r) { s.columns["value"].push_back(r.accuracy); });
      break;
    case PlotKind::duration_distribution:
      spec.title = "Epoch duration distribution";
      spec.x_label = "duration (s)";
      spec.y_label = "count";
      spec.series = per_model(
          rows, [](Series& s, const ResultRow& r) { s.columns["value"].push_back(static_cast<double>(r.duration)); });
      break;
    case PlotKind::corr_heatmap:
      spec.title = "Pearson correlation";
      spec.x_label.clear();
      spec.y_label.clear();
      spec.series = correlation(rows);
      break;
  }
  return spec;
}

}  // namespace lemur::report
