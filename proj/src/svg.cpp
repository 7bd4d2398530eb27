#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lemur/error.hpp"
#include "lemur/report.hpp"

namespace lemur::report {
namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 460;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 48;
constexpr double kBottom = 64;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % kPalette.size()]; }

constexpr std::array<PlotKind, 9> kAllKinds = {
    PlotKind::scatter_acc_epoch, PlotKind::scatter_acc_duration, PlotKind::line_acc_time,
    PlotKind::box_acc_epoch,     PlotKind::histogram_acc,        PlotKind::rolling_mean,
    PlotKind::mean_std_band,     PlotKind::corr_heatmap,         PlotKind::duration_distribution};

std::string esc(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        if (static_cast<unsigned char>(ch) >= 0x20 || ch == '\t' || ch == '\n') out.push_back(ch);
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string label(double v) {
  if (v != 0.0 && (std::fabs(v) >= 1e5 || std::fabs(v) < 1e-3)) return fmt::format("{:.2e}", v);
  return fmt::format("{:.3g}", v);
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    if (!std::isfinite(v)) return;
    if (empty_) {
      lo = hi = v;
      empty_ = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  static Range of(double lo, double hi) {
    Range r;
    r.include(lo);
    r.include(hi);
    return r;
  }
  Range padded() const {
    Range r = *this;
    if (empty_) return Range{};
    double pad = (hi - lo) * 0.05;
    if (pad == 0.0) pad = std::max(std::fabs(lo) * 0.05, 0.5);
    r.lo -= pad;
    r.hi += pad;
    return r;
  }

 private:
  bool empty_ = true;
};

struct Frame {
  Range x, y;
  double plot_w() const { return kWidth - kLeft - kRight; }
  double plot_h() const { return kHeight - kTop - kBottom; }
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * plot_w(); }
  double py(double v) const { return kTop + plot_h() - (v - y.lo) / (y.hi - y.lo) * plot_h(); }
};

const std::vector<double>& column(const Series& s, const char* name) {
  auto it = s.columns.find(name);
  if (it == s.columns.end()) {
    throw std::invalid_argument("series '" + s.name + "' lacks column '" + name + "'");
  }
  return it->second;
}

std::vector<const char*> required_columns(PlotKind kind) {
  switch (kind) {
    case PlotKind::scatter_acc_epoch:
    case PlotKind::scatter_acc_duration:
    case PlotKind::line_acc_time:
    case PlotKind::rolling_mean:
      return {"x", "y"};
    case PlotKind::mean_std_band:
      return {"x", "mean", "std"};
    case PlotKind::box_acc_epoch:
    case PlotKind::histogram_acc:
    case PlotKind::duration_distribution:
      return {"value"};
    case PlotKind::corr_heatmap:
      return {"r"};
  }
  return {};
}

std::size_t series_length(const Series& s, PlotKind kind) {
  return column(s, required_columns(kind).front()).size();
}

class SvgDoc {
 public:
  explicit SvgDoc(const PlotSpec& spec) {
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight);
    out_ += fmt::format("<title>{}</title>\n", esc(spec.title));
    out_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", kWidth, kHeight);
    out_ += fmt::format("<text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                        num(kLeft + (kWidth - kLeft - kRight) / 2), esc(spec.title));
  }

  void axes(const Frame& f, const PlotSpec& spec, bool numeric_x = true) {
    out_ += "<g class=\"axes\" stroke=\"#333333\" fill=\"none\">\n";
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n", num(kLeft), num(kTop),
                        num(f.plot_w()), num(f.plot_h()));
    out_ += "</g>\n<g class=\"ticks\" font-size=\"10\" fill=\"#333333\">\n";
    for (int i = 0; i <= 5; ++i) {
      const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 5.0;
      out_ += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(kLeft - 6),
                          num(f.py(yv) + 3), esc(label(yv)));
      if (numeric_x) {
        const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 5.0;
        out_ += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(f.px(xv)),
                            num(kTop + f.plot_h() + 14), esc(label(xv)));
      }
    }
    out_ += "</g>\n";
    out_ += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                        num(kLeft + f.plot_w() / 2), num(kHeight - 18), esc(spec.x_label));
    out_ += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                        num(kTop + f.plot_h() / 2), esc(spec.y_label));
  }

  void legend(const std::vector<Series>& series) {
    out_ += "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      const double y = kTop + 10 + 18.0 * static_cast<double>(i);
      out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                          num(kWidth - kRight + 16), num(y - 9), color(i));
      out_ += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(kWidth - kRight + 32), num(y),
                          esc(series[i].name));
    }
    out_ += "</g>\n";
  }

  void raw(const std::string& s) { out_ += s; }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

struct XY {
  double x;
  double y;
};

std::vector<XY> sorted_points(const Series& s, const char* ycol) {
  const auto& xs = column(s, "x");
  const auto& ys = column(s, ycol);
  std::vector<XY> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back(XY{xs[i], ys[i]});
  std::stable_sort(pts.begin(), pts.end(), [](const XY& a, const XY& b) { return a.x < b.x; });
  return pts;
}

std::string polyline(const Frame& f, const std::vector<XY>& pts, const char* stroke, const char* cls) {
  std::string d;
  for (const XY& p : pts) {
    if (!d.empty()) d.push_back(' ');
    d += num(f.px(p.x)) + "," + num(f.py(p.y));
  }
  return fmt::format("<polyline class=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                     cls, d, stroke);
}

std::string marker(const Frame& f, double x, double y, const char* fill) {
  return fmt::format("<circle class=\"mark\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"/>\n",
                     num(f.px(x)), num(f.py(y)), fill);
}

std::string render_points(const PlotSpec& spec) {
  Frame f;
  const bool band = spec.kind == PlotKind::mean_std_band;
  const char* ycol = band ? "mean" : "y";
  Range xr, yr;
  for (const Series& s : spec.series) {
    for (double v : column(s, "x")) xr.include(v);
    const auto& ys = column(s, ycol);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      yr.include(ys[i]);
      if (band) {
        yr.include(ys[i] + column(s, "std")[i]);
        yr.include(ys[i] - column(s, "std")[i]);
      }
    }
  }
  f.x = xr.padded();
  f.y = yr.padded();
  SvgDoc doc(spec);
  doc.axes(f, spec);
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const Series& s = spec.series[si];
    const char* c = color(si);
    doc.raw(fmt::format("<g class=\"series\" data-name=\"{}\">\n", esc(s.name)));
    switch (spec.kind) {
      case PlotKind::scatter_acc_epoch:
      case PlotKind::scatter_acc_duration: {
        const auto& xs = column(s, "x");
        const auto& ys = column(s, "y");
        for (std::size_t i = 0; i < xs.size(); ++i) doc.raw(marker(f, xs[i], ys[i], c));
        break;
      }
      case PlotKind::line_acc_time: {
        auto pts = sorted_points(s, "y");
        doc.raw(polyline(f, pts, c, "line"));
        for (const XY& p : pts) doc.raw(marker(f, p.x, p.y, c));
        break;
      }
      case PlotKind::rolling_mean: {
        auto pts = sorted_points(s, "y");
        std::vector<stats::SeriesPoint> series;
        for (std::size_t i = 0; i < pts.size(); ++i) series.push_back({static_cast<int>(i) + 1, pts[i].y});
        auto smooth = stats::rolling_mean(series, spec.window);
        std::vector<XY> smoothed;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          doc.raw(fmt::format("<circle class=\"raw\" cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.25\"/>\n",
                              num(f.px(pts[i].x)), num(f.py(pts[i].y)), c));
          smoothed.push_back(XY{pts[i].x, smooth[i].value});
        }
        doc.raw(polyline(f, smoothed, c, "line"));
        for (const XY& p : smoothed) doc.raw(marker(f, p.x, p.y, c));
        break;
      }
      case PlotKind::mean_std_band: {
        const auto& xs = column(s, "x");
        const auto& means = column(s, "mean");
        const auto& sds = column(s, "std");
        std::vector<std::size_t> idx(xs.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        std::string upper, lower;
        std::vector<XY> mean_line;
        for (std::size_t i : idx) {
          upper += num(f.px(xs[i])) + "," + num(f.py(means[i] + sds[i])) + " ";
          mean_line.push_back(XY{xs[i], means[i]});
        }
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
          lower += num(f.px(xs[*it])) + "," + num(f.py(means[*it] - sds[*it])) + " ";
        }
        std::string poly = upper + lower;
        if (!poly.empty()) poly.pop_back();
        doc.raw(fmt::format("<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n",
                            poly, c));
        doc.raw(polyline(f, mean_line, c, "line"));
        for (const XY& p : mean_line) doc.raw(marker(f, p.x, p.y, c));
        break;
      }
      default:
        break;
    }
    doc.raw("</g>\n");
  }
  doc.legend(spec.series);
  return doc.finish();
}

std::string render_box(const PlotSpec& spec) {
  Frame f;
  Range yr;
  std::vector<BoxStats> boxes;
  for (const Series& s : spec.series) {
    for (double v : column(s, "value")) yr.include(v);
    boxes.push_back(box_stats(column(s, "value")));
  }
  const auto n = static_cast<double>(spec.series.size());
  f.x = Range::of(0.0, n);
  f.y = yr.padded();
  SvgDoc doc(spec);
  doc.axes(f, spec, false);
  const double slot = f.plot_w() / n;
  const double half = std::min(slot * 0.3, 30.0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxStats& b = boxes[i];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const char* c = color(i);
    doc.raw(fmt::format("<g class=\"series\" data-name=\"{}\">\n", esc(spec.series[i].name)));
    doc.raw(fmt::format("<line class=\"whisker\" data-lo=\"{0}\" data-hi=\"{1}\" x1=\"{2}\" y1=\"{3}\" x2=\"{2}\" y2=\"{4}\" "
                        "stroke=\"#333333\"/>\n",
                        label(b.whisker_lo), label(b.whisker_hi), num(cx), num(f.py(b.whisker_lo)),
                        num(f.py(b.whisker_hi))));
    for (double w : {b.whisker_lo, b.whisker_hi}) {
      doc.raw(fmt::format("<line class=\"whisker-cap\" x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#333333\"/>\n",
                          num(cx - half / 2), num(cx + half / 2), num(f.py(w))));
    }
    doc.raw(fmt::format("<rect class=\"mark box\" data-q1=\"{}\" data-q3=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" "
                        "height=\"{}\" fill=\"{}\" fill-opacity=\"0.6\" stroke=\"#333333\"/>\n",
                        label(b.q1), label(b.q3), num(cx - half), num(f.py(b.q3)), num(2 * half),
                        num(std::max(f.py(b.q1) - f.py(b.q3), 0.5)), c));
    doc.raw(fmt::format("<line class=\"median\" data-value=\"{0}\" x1=\"{1}\" y1=\"{3}\" x2=\"{2}\" y2=\"{3}\" "
                        "stroke=\"#000000\" stroke-width=\"2\"/>\n",
                        label(b.median), num(cx - half), num(cx + half), num(f.py(b.median))));
    for (double o : b.outliers) {
      doc.raw(fmt::format("<circle class=\"outlier\" data-value=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"none\" "
                          "stroke=\"{}\"/>\n",
                          label(o), num(cx), num(f.py(o)), c));
    }
    doc.raw(fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n", num(cx),
                        num(kTop + f.plot_h() + 14), esc(spec.series[i].name)));
    doc.raw("</g>\n");
  }
  return doc.finish();
}

std::string render_histogram(const PlotSpec& spec) {
  const bool seconds = spec.kind == PlotKind::duration_distribution;
  auto scaled = [&](const Series& s) {
    std::vector<double> v = column(s, "value");
    if (seconds) {
      for (double& x : v) x = stats::ns_to_seconds(x);
    }
    return v;
  };
  std::vector<double> pooled;
  for (const Series& s : spec.series) {
    auto v = scaled(s);
    pooled.insert(pooled.end(), v.begin(), v.end());
  }
  const auto edges = stats::histogram(pooled, spec.bins);
  const double lo = edges.front().lo;
  const double hi = edges.back().hi;
  std::vector<std::vector<std::size_t>> counts;
  std::size_t max_count = 1;
  for (const Series& s : spec.series) {
    std::vector<std::size_t> c(edges.size(), 0);
    for (double v : scaled(s)) {
      auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * spec.bins));
      ++c[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, spec.bins - 1))];
    }
    max_count = std::max(max_count, *std::max_element(c.begin(), c.end()));
    counts.push_back(std::move(c));
  }
  Frame f;
  f.x = Range::of(lo, hi);
  f.y = Range::of(0.0, static_cast<double>(max_count) * 1.05);
  SvgDoc doc(spec);
  doc.axes(f, spec);
  const double group_w = f.plot_w() / static_cast<double>(edges.size());
  const double bar_w = group_w / static_cast<double>(spec.series.size());
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    doc.raw(fmt::format("<g class=\"series\" data-name=\"{}\">\n", esc(spec.series[si].name)));
    for (std::size_t b = 0; b < edges.size(); ++b) {
      const double x = kLeft + group_w * static_cast<double>(b) + bar_w * static_cast<double>(si);
      const double top = f.py(static_cast<double>(counts[si][b]));
      doc.raw(fmt::format("<rect class=\"mark\" data-count=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
                          "fill=\"{}\" fill-opacity=\"0.8\"/>\n",
                          counts[si][b], num(x), num(top), num(std::max(bar_w - 0.5, 0.5)),
                          num(kTop + f.plot_h() - top), color(si)));
    }
    doc.raw("</g>\n");
  }
  doc.legend(spec.series);
  return doc.finish();
}

std::string heat_color(double r) {
  // Diverging blue (-1) / white (0) / red (+1).
  const double t = std::clamp(r, -1.0, 1.0);
  int red, green, blue;
  if (t >= 0) {
    red = 255;
    green = blue = static_cast<int>(std::lround(255 * (1 - t)));
  } else {
    blue = 255;
    red = green = static_cast<int>(std::lround(255 * (1 + t)));
  }
  return fmt::format("#{:02x}{:02x}{:02x}", red, green, blue);
}

std::string render_heatmap(const PlotSpec& spec) {
  const std::size_t n = spec.series.size();
  for (const Series& s : spec.series) {
    if (column(s, "r").size() != n) throw std::invalid_argument("correlation matrix must be square");
  }
  SvgDoc doc(spec);
  const double side = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  const double cell = side / static_cast<double>(n);
  doc.raw("<g class=\"heatmap\">\n");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = column(spec.series[i], "r");
    for (std::size_t j = 0; j < n; ++j) {
      const double x = kLeft + cell * static_cast<double>(j);
      const double y = kTop + cell * static_cast<double>(i);
      const bool defined = std::isfinite(row[j]);
      doc.raw(fmt::format("<rect class=\"mark\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
                          "stroke=\"#ffffff\"/>\n",
                          num(x), num(y), num(cell), num(cell), defined ? heat_color(row[j]) : "#cccccc"));
      doc.raw(fmt::format("<text class=\"annotation\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                          num(x + cell / 2), num(y + cell / 2 + 4),
                          defined ? fmt::format("{:.2f}", row[j]) : std::string("n/a")));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    doc.raw(fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n", num(kLeft - 4),
                        num(kTop + cell * (static_cast<double>(i) + 0.5) + 3), esc(spec.series[i].name)));
    doc.raw(fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
                        num(kLeft + cell * (static_cast<double>(i) + 0.5)), num(kTop + side + 14),
                        esc(spec.series[i].name)));
  }
  doc.raw("</g>\n");
  return doc.finish();
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::scatter_acc_epoch: return "scatter_acc_epoch";
    case PlotKind::scatter_acc_duration: return "scatter_acc_duration";
    case PlotKind::line_acc_time: return "line_acc_time";
    case PlotKind::box_acc_epoch: return "box_acc_epoch";
    case PlotKind::histogram_acc: return "histogram_acc";
    case PlotKind::rolling_mean: return "rolling_mean";
    case PlotKind::mean_std_band: return "mean_std_band";
    case PlotKind::corr_heatmap: return "corr_heatmap";
    case PlotKind::duration_distribution: return "duration_distribution";
  }
  return "unknown";
}

std::optional<PlotKind> plot_kind_from(std::string_view name) {
  for (PlotKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::span<const PlotKind> all_plot_kinds() { return kAllKinds; }

void validate(const PlotSpec& spec) {
  std::size_t total = 0;
  for (const Series& s : spec.series) {
    const auto cols = required_columns(spec.kind);
    const std::size_t len = column(s, cols.front()).size();
    for (const char* c : cols) {
      const auto& v = column(s, c);
      if (v.size() != len) throw std::invalid_argument("series '" + s.name + "' has ragged columns");
      if (spec.kind != PlotKind::corr_heatmap) {
        for (double x : v) {
          if (!std::isfinite(x)) throw std::invalid_argument("series '" + s.name + "' has non-finite values");
        }
      }
    }
    total += len;
  }
  if (total == 0) throw EmptySeries("plot '" + spec.title + "' has no data");
  if (spec.bins < 1 || spec.window < 1) throw std::invalid_argument("bins and window must be >= 1");
}

std::size_t expected_mark_count(const PlotSpec& spec) {
  switch (spec.kind) {
    case PlotKind::box_acc_epoch: {
      std::size_t n = 0;
      for (const Series& s : spec.series) n += column(s, "value").empty() ? 0 : 1;
      return n;
    }
    case PlotKind::histogram_acc:
    case PlotKind::duration_distribution:
      return static_cast<std::size_t>(spec.bins) * spec.series.size();
    case PlotKind::corr_heatmap:
      return spec.series.size() * spec.series.size();
    default: {
      std::size_t n = 0;
      for (const Series& s : spec.series) n += series_length(s, spec.kind);
      return n;
    }
  }
}

std::string render_svg(const PlotSpec& spec) {
  validate(spec);
  if (spec.kind == PlotKind::box_acc_epoch) {
    PlotSpec trimmed = spec;
    std::erase_if(trimmed.series, [](const Series& s) { return column(s, "value").empty(); });
    return render_box(trimmed);
  }
  switch (spec.kind) {
    case PlotKind::histogram_acc:
    case PlotKind::duration_distribution:
      return render_histogram(spec);
    case PlotKind::corr_heatmap:
      return render_heatmap(spec);
    default:
      return render_points(spec);
  }
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptyInput("quantile of no values");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + (sorted[above] - sorted[below]) * frac;
}

BoxStats box_stats(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  if (v.empty()) throw EmptyInput("box plot of no values");
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.q1 = quantile(v, 0.25);
  b.median = quantile(v, 0.5);
  b.q3 = quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
      continue;
    }
    b.whisker_lo = std::min(b.whisker_lo, x);
    b.whisker_hi = std::max(b.whisker_hi, x);
  }
  return b;
}

}  // namespace lemur::report
