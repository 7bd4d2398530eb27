#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lemur/space.hpp"

namespace lemur {

// One benchmark configuration, written `task_dataset_metric_nn`.
struct ConfigId {
  std::string task;
  std::string dataset;
  std::string metric;
  std::string nn;

  friend bool operator==(const ConfigId&, const ConfigId&) = default;
  friend auto operator<=>(const ConfigId&, const ConfigId&) = default;
};

// `[a-z0-9]+(-[a-z0-9]+)*`: task, dataset and metric fields.
bool is_field_token(std::string_view s);
// `[A-Za-z0-9]+(-[A-Za-z0-9]+)*`: model names, transform names, code names.
bool is_name_token(std::string_view s);

ConfigId parse_config(std::string_view s);
std::string format_config(const ConfigId& c);

// Hyperparameter ranges as given on the command line. Setting a min equal to
// its max pins that hyperparameter.
struct RangeArgs {
  double min_learning_rate = 1e-4;
  double max_learning_rate = 1.0;
  int min_batch_binary_power = 2;
  int max_batch_binary_power = 7;
  double min_momentum = 0.0;
  double max_momentum = 0.99;
  std::optional<std::string> transform;
  int trials = 100;
  int max_epochs = 50;
};

inline constexpr int kMaxEpochs = 50;

// Throws InvalidRange naming the first offending flag.
void validate(const RangeArgs& a);

// Keys: lr, batch, momentum, transform. `registered_transforms` feeds the
// transform choice set when no transform is pinned.
SearchSpace space_from_args(const RangeArgs& a,
                            std::span<const std::string> registered_transforms);

}  // namespace lemur
