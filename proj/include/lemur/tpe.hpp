#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemur/prm.hpp"
#include "lemur/rng.hpp"
#include "lemur/space.hpp"

namespace lemur {

struct TpeSettings {
  double gamma = 0.25;
  int n_startup = 10;
  int n_candidates = 24;
};

struct Observation {
  PrmMap prm;
  double objective = 0.0;
};

// Everything a study needs to reproduce its suggestion sequence. The
// objective is always maximized.
struct StudyState {
  SearchSpace space;
  std::vector<Observation> history;
  std::uint64_t seed = 0;
  TpeSettings settings;
  // Number of suggestions handed out so far, failed trials included. Each
  // suggestion draws from its own stream keyed by this counter.
  std::uint64_t n_asked = 0;
};

// Log-uniform in log space, uniform, 2^k with uniform integer k, uniform
// choice.
PrmMap sample_prior(const SearchSpace& space, Rng& rng);

struct GoodBadSplit {
  std::vector<Observation> good;
  std::vector<Observation> bad;
};

// Stable sort by objective, best first; the first max(1, ceil(gamma * n))
// observations are good.
GoodBadSplit split_good_bad(std::span<const Observation> history, double gamma);

// Density model for one parameter.
//
// Numeric kinds live in an internal coordinate: log(x) for log-uniform, the
// exponent for binary powers (domain widened by half a step on each side so
// rounding covers the end points evenly), x itself for uniform. The model
// is a mixture of one truncated Gaussian per observation plus a prior
// component centred on the domain with sigma equal to its width, all
// equally weighted. Each observation's bandwidth is
// the larger gap to its sorted neighbours (domain bounds stand in at the
// ends), clipped to [width / min(100, n + 1), width].
//
// Categorical kinds use Laplace-smoothed weights (count + 1) / (n + K).
class ParzenModel {
 public:
  static ParzenModel fit(std::span<const ParamValue> observations, const ParamSpec& spec);

  bool categorical() const { return categorical_; }

  // Density at a value, measured in the internal coordinate for numeric
  // kinds and as a probability mass for categorical ones.
  double pdf(const ParamValue& value) const;
  double pdf_internal(double x) const;

  // Draws in the internal coordinate (numeric) or a choice index.
  double sample_internal(Rng& rng) const;

  double low() const { return low_; }
  double high() const { return high_; }
  double prior_mean() const { return 0.5 * (low_ + high_); }
  double prior_sigma() const { return high_ - low_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  // Component weights; the last one belongs to the prior.
  const std::vector<double>& weights() const { return weights_; }

  double to_internal(const ParamValue& value) const;
  ParamValue from_internal(double x) const;

 private:
  ParamSpec spec_;
  bool categorical_ = false;
  double low_ = 0.0;
  double high_ = 0.0;
  std::vector<double> means_;
  std::vector<double> sigmas_;
  std::vector<double> weights_;
};

// Pure function of the study state. Prior sampling while the history is
// shorter than n_startup, otherwise per-parameter argmax of l(x)/g(x) over
// n_candidates draws from l.
PrmMap suggest(const StudyState& study);

// suggest() followed by bumping n_asked.
PrmMap ask(StudyState& study);

// Appends (prm, objective). Throws NonFinite for NaN/inf objectives and
// BadHyperparameter when prm does not conform to the space.
void observe(StudyState& study, PrmMap prm, double objective);

nlohmann::json study_to_json(const StudyState& study);
StudyState study_from_json(const nlohmann::json& j);

}  // namespace lemur
