#include "lemur/config.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lemur/error.hpp"

namespace lemur {
namespace {

template <typename CharOk>
bool hyphenated_token(std::string_view s, CharOk ok) {
  if (s.empty() || s.front() == '-' || s.back() == '-') return false;
  char prev = '\0';
  for (char ch : s) {
    if (ch == '-') {
      if (prev == '-') return false;
    } else if (!ok(ch)) {
      return false;
    }
    prev = ch;
  }
  return true;
}

bool lower_alnum(char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9');
}

bool alnum(char ch) {
  return lower_alnum(ch) || (ch >= 'A' && ch <= 'Z');
}

}  // namespace

bool is_field_token(std::string_view s) { return hyphenated_token(s, lower_alnum); }

bool is_name_token(std::string_view s) { return hyphenated_token(s, alnum); }

ConfigId parse_config(std::string_view s) {
  if (s.empty()) throw MalformedConfig("config string is empty");
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t us = s.find('_', pos);
    fields.push_back(s.substr(pos, us == std::string_view::npos ? std::string_view::npos : us - pos));
    if (us == std::string_view::npos) break;
    pos = us + 1;
  }
  if (fields.size() != 4) {
    throw MalformedConfig("config '" + std::string(s) + "' has " +
                          std::to_string(fields.size()) +
                          " fields; expected task_dataset_metric_nn");
  }
  static constexpr const char* kNames[] = {"task", "dataset", "metric", "nn"};
  for (std::size_t i = 0; i < 4; ++i) {
    bool ok = i < 3 ? is_field_token(fields[i]) : is_name_token(fields[i]);
    if (!ok) {
      throw MalformedConfig(std::string("config field '") + kNames[i] + "' is " +
                            (fields[i].empty() ? "empty" : "invalid: '" + std::string(fields[i]) + "'"));
    }
  }
  return ConfigId{std::string(fields[0]), std::string(fields[1]),
                  std::string(fields[2]), std::string(fields[3])};
}

std::string format_config(const ConfigId& c) {
  return c.task + '_' + c.dataset + '_' + c.metric + '_' + c.nn;
}

void validate(const RangeArgs& a) {
  auto fail = [](const std::string& msg) { throw InvalidRange(msg); };
  if (!(a.min_learning_rate > 0) || !std::isfinite(a.min_learning_rate))
    fail("--min_learning_rate must be positive");
  if (!(a.max_learning_rate > 0) || !std::isfinite(a.max_learning_rate))
    fail("--max_learning_rate must be positive");
  if (a.min_learning_rate > a.max_learning_rate)
    fail("--min_learning_rate exceeds --max_learning_rate");
  if (a.min_batch_binary_power < 0) fail("--min_batch_binary_power must be >= 0");
  if (a.max_batch_binary_power > 30) fail("--max_batch_binary_power must be <= 30");
  if (a.min_batch_binary_power > a.max_batch_binary_power)
    fail("--min_batch_binary_power exceeds --max_batch_binary_power");
  if (!(a.min_momentum >= 0 && a.min_momentum <= 1)) fail("--min_momentum must lie in [0,1]");
  if (!(a.max_momentum >= 0 && a.max_momentum <= 1)) fail("--max_momentum must lie in [0,1]");
  if (a.min_momentum > a.max_momentum) fail("--min_momentum exceeds --max_momentum");
  if (a.transform && !is_name_token(*a.transform))
    fail("--transform '" + *a.transform + "' is not a valid name");
  if (a.trials < 1) fail("--trials must be >= 1");
  if (a.max_epochs < 1 || a.max_epochs > kMaxEpochs) fail("--epochs must lie in [1,50]");
}

SearchSpace space_from_args(const RangeArgs& a,
                            std::span<const std::string> registered_transforms) {
  validate(a);
  Categorical transforms;
  if (a.transform) {
    transforms.choices = {*a.transform};
  } else {
    transforms.choices.assign(registered_transforms.begin(), registered_transforms.end());
  }
  if (transforms.choices.empty()) {
    throw EmptyChoiceSet("no transforms registered and --transform not given");
  }
  return SearchSpace{
      {"lr", LogUniform{a.min_learning_rate, a.max_learning_rate}},
      {"batch", IntPow2{a.min_batch_binary_power, a.max_batch_binary_power}},
      {"momentum", Uniform{a.min_momentum, a.max_momentum}},
      {"transform", std::move(transforms)},
  };
}

}  // namespace lemur
