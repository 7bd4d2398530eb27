#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lemur::metrics {

// Fraction of positions where prediction equals target. Throws EmptyBatch
// for empty input and LengthMismatch for unequal lengths.
double accuracy(std::span<const int> predictions, std::span<const int> targets);

// Row-major H x W grids of class ids in [0, num_classes).
struct MaskPair {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> predicted;
  std::vector<int> target;
};

// Per-class intersection and union counts accumulated over a set of masks.
struct IouAccumulator {
  explicit IouAccumulator(int num_classes);

  // Throws LengthMismatch on shape errors and std::out_of_range for ids
  // outside [0, num_classes).
  void add(const MaskPair& pair);
  void merge(const IouAccumulator& other);
  // Mean over classes with a non-empty union. Throws NoValidClass when no
  // class has one.
  double mean_iou() const;

  int num_classes;
  std::vector<std::int64_t> intersection;
  std::vector<std::int64_t> union_;
};

// Dataset-level mIoU: counts are summed over every pair before dividing.
double mean_iou(std::span<const MaskPair> pairs, int num_classes);

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

struct Detection {
  int class_id = 0;
  double confidence = 0;
  Box box;
};

struct GroundTruth {
  int class_id = 0;
  Box box;
};

double box_iou(const Box& a, const Box& b);

inline constexpr double kMatchIou = 0.5;

// Average precision for one class with all-point interpolation. Detections
// are ranked by confidence (stable, so ties keep input order) and matched
// greedily to the free ground truth with the highest IoU >= threshold
// (ties go to the earlier ground truth).
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold = kMatchIou);

// Area under the monotone precision envelope of a ranked TP/FP sequence.
double all_point_ap(const std::vector<bool>& ranked_is_tp, std::size_t num_ground_truth);

// Mean of AP over classes that have ground truth. Throws NoGroundTruth when
// `gts` is empty.
double map_at_50(std::span<const Detection> dets, std::span<const GroundTruth> gts);

}  // namespace lemur::metrics
