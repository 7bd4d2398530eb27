#include "lemur/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lemur/error.hpp"

namespace lemur::metrics {

double accuracy(std::span<const int> predictions, std::span<const int> targets) {
  if (predictions.size() != targets.size()) {
    throw LengthMismatch("predictions and targets differ in length");
  }
  if (targets.empty()) throw EmptyBatch("accuracy of an empty batch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) hits += predictions[i] == targets[i];
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

IouAccumulator::IouAccumulator(int classes)
    : num_classes(classes),
      intersection(static_cast<std::size_t>(classes), 0),
      union_(static_cast<std::size_t>(classes), 0) {
  if (classes < 1) throw std::invalid_argument("num_classes must be >= 1");
}

void IouAccumulator::add(const MaskPair& pair) {
  const std::size_t n = pair.height * pair.width;
  if (pair.predicted.size() != n || pair.target.size() != n) {
    throw LengthMismatch("mask size does not match its shape");
  }
  // Per class: union = |pred| + |target| - |both|.
  std::vector<std::int64_t> pred_count(intersection.size(), 0), target_count(intersection.size(), 0),
      both(intersection.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int p = pair.predicted[i];
    const int t = pair.target[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) {
      throw std::out_of_range("class id outside [0, num_classes)");
    }
    ++pred_count[static_cast<std::size_t>(p)];
    ++target_count[static_cast<std::size_t>(t)];
    if (p == t) ++both[static_cast<std::size_t>(p)];
  }
  for (std::size_t c = 0; c < intersection.size(); ++c) {
    intersection[c] += both[c];
    union_[c] += pred_count[c] + target_count[c] - both[c];
  }
}

void IouAccumulator::merge(const IouAccumulator& other) {
  if (other.num_classes != num_classes) throw LengthMismatch("class count mismatch");
  for (std::size_t c = 0; c < intersection.size(); ++c) {
    intersection[c] += other.intersection[c];
    union_[c] += other.union_[c];
  }
}

double IouAccumulator::mean_iou() const {
  double sum = 0.0;
  int valid = 0;
  for (std::size_t c = 0; c < intersection.size(); ++c) {
    if (union_[c] == 0) continue;
    sum += static_cast<double>(intersection[c]) / static_cast<double>(union_[c]);
    ++valid;
  }
  if (valid == 0) throw NoValidClass("no class has a non-empty union");
  return sum / valid;
}

double mean_iou(std::span<const MaskPair> pairs, int num_classes) {
  IouAccumulator acc(num_classes);
  for (const MaskPair& p : pairs) acc.add(p);
  return acc.mean_iou();
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  return inter / (area_a + area_b - inter);
}

double all_point_ap(const std::vector<bool>& ranked_is_tp, std::size_t num_ground_truth) {
  if (num_ground_truth == 0) return 0.0;
  const std::size_t n = ranked_is_tp.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked_is_tp[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_ground_truth);
  }
  // Envelope: precision at rank i becomes the best precision at any rank >= i.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> is_tp;
  is_tp.reserve(order.size());
  for (std::size_t d : order) {
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = box_iou(dets[d].box, gts[g].box);
      if (iou >= iou_threshold && iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size()) taken[best_gt] = true;
    is_tp.push_back(best_gt < gts.size());
  }
  return all_point_ap(is_tp, gts.size());
}

double map_at_50(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  if (gts.empty()) throw NoGroundTruth("mAP is undefined without ground truth");
  std::map<int, std::pair<std::vector<Detection>, std::vector<GroundTruth>>> by_class;
  for (const GroundTruth& g : gts) by_class[g.class_id].second.push_back(g);
  for (const Detection& d : dets) {
    auto it = by_class.find(d.class_id);
    if (it != by_class.end()) it->second.first.push_back(d);
  }
  double sum = 0.0;
  for (const auto& [cls, bucket] : by_class) sum += average_precision(bucket.first, bucket.second, kMatchIou);
  return sum / static_cast<double>(by_class.size());
}

}  // namespace lemur::metrics
