#include "lemur/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lemur/error.hpp"

namespace lemur {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

std::int64_t pow2(int k) { return std::int64_t{1} << k; }

int log2_exact(std::int64_t v) {
  int k = 0;
  while ((static_cast<std::uint64_t>(v) >> k) > 1) ++k;
  return k;
}

ParamValue sample_one(const ParamSpec& spec, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const LogUniform& s) -> ParamValue {
                          if (s.lo == s.hi) return s.lo;
                          double v = std::exp(rng.uniform(std::log(s.lo), std::log(s.hi)));
                          return std::clamp(v, s.lo, s.hi);
                        },
                        [&](const Uniform& s) -> ParamValue {
                          if (s.lo == s.hi) return s.lo;
                          return std::clamp(rng.uniform(s.lo, s.hi), s.lo, s.hi);
                        },
                        [&](const IntPow2& s) -> ParamValue {
                          return pow2(static_cast<int>(rng.uniform_int(s.pmin, s.pmax)));
                        },
                        [&](const Categorical& s) -> ParamValue {
                          return s.choices[static_cast<std::size_t>(
                              rng.uniform_int(0, static_cast<std::int64_t>(s.choices.size()) - 1))];
                        },
                    },
                    spec);
}

std::uint64_t name_salt(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : name) h = (h ^ ch) * 1099511628211ULL;
  return h;
}

}  // namespace

PrmMap sample_prior(const SearchSpace& space, Rng& rng) {
  PrmMap out;
  for (const auto& [name, spec] : space) out[name] = sample_one(spec, rng);
  return out;
}

GoodBadSplit split_good_bad(std::span<const Observation> history, double gamma) {
  std::vector<Observation> sorted(history.begin(), history.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Observation& a, const Observation& b) { return a.objective > b.objective; });
  GoodBadSplit split;
  if (sorted.empty()) return split;
  const auto n = sorted.size();
  auto n_good = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n)));
  n_good = std::clamp<std::size_t>(n_good, 1, n);
  split.good.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_good));
  split.bad.assign(sorted.begin() + static_cast<std::ptrdiff_t>(n_good), sorted.end());
  return split;
}

double ParzenModel::to_internal(const ParamValue& value) const {
  return std::visit(Overloaded{
                        [&](const LogUniform&) { return std::log(std::get<double>(value)); },
                        [&](const Uniform&) { return std::get<double>(value); },
                        [&](const IntPow2&) {
                          return static_cast<double>(log2_exact(std::get<std::int64_t>(value)));
                        },
                        [&](const Categorical& s) {
                          const auto& v = std::get<std::string>(value);
                          auto it = std::find(s.choices.begin(), s.choices.end(), v);
                          return static_cast<double>(it - s.choices.begin());
                        },
                    },
                    spec_);
}

ParamValue ParzenModel::from_internal(double x) const {
  return std::visit(Overloaded{
                        [&](const LogUniform& s) -> ParamValue { return std::clamp(std::exp(x), s.lo, s.hi); },
                        [&](const Uniform& s) -> ParamValue { return std::clamp(x, s.lo, s.hi); },
                        [&](const IntPow2& s) -> ParamValue {
                          int k = static_cast<int>(std::lround(x));
                          return pow2(std::clamp(k, s.pmin, s.pmax));
                        },
                        [&](const Categorical& s) -> ParamValue {
                          auto i = static_cast<std::size_t>(std::lround(x));
                          return s.choices[std::min(i, s.choices.size() - 1)];
                        },
                    },
                    spec_);
}

ParzenModel ParzenModel::fit(std::span<const ParamValue> observations, const ParamSpec& spec) {
  ParzenModel m;
  m.spec_ = spec;
  if (const auto* cat = std::get_if<Categorical>(&spec)) {
    m.categorical_ = true;
    const double k = static_cast<double>(cat->choices.size());
    const double n = static_cast<double>(observations.size());
    m.weights_.assign(cat->choices.size(), 0.0);
    for (const ParamValue& v : observations) {
      m.weights_[static_cast<std::size_t>(m.to_internal(v))] += 1.0;
    }
    for (double& w : m.weights_) w = (w + 1.0) / (n + k);
    return m;
  }

  std::visit(Overloaded{
                 [&](const LogUniform& s) {
                   m.low_ = std::log(s.lo);
                   m.high_ = std::log(s.hi);
                 },
                 [&](const Uniform& s) {
                   m.low_ = s.lo;
                   m.high_ = s.hi;
                 },
                 [&](const IntPow2& s) {
                   m.low_ = s.pmin - 0.5;
                   m.high_ = s.pmax + 0.5;
                 },
                 [](const Categorical&) {},
             },
             spec);

  const double width = m.high_ - m.low_;
  for (const ParamValue& v : observations) m.means_.push_back(std::clamp(m.to_internal(v), m.low_, m.high_));
  std::sort(m.means_.begin(), m.means_.end());
  const std::size_t n = m.means_.size();
  const double min_sigma = width / std::min(100.0, 1.0 + static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? m.low_ : m.means_[i - 1];
    const double right = i + 1 == n ? m.high_ : m.means_[i + 1];
    const double gap = std::max(m.means_[i] - left, right - m.means_[i]);
    m.sigmas_.push_back(std::clamp(gap, min_sigma, width));
  }
  m.weights_.assign(n + 1, 1.0 / static_cast<double>(n + 1));
  return m;
}

double ParzenModel::pdf_internal(double x) const {
  const double width = high_ - low_;
  if (width <= 0.0) return 1.0;
  if (x < low_ || x > high_) return 0.0;
  auto component = [&](double mu, double sigma) {
    const double mass = normal_cdf((high_ - mu) / sigma) - normal_cdf((low_ - mu) / sigma);
    return normal_pdf((x - mu) / sigma) / (sigma * mass);
  };
  double density = weights_.back() * component(prior_mean(), prior_sigma());
  for (std::size_t i = 0; i < means_.size(); ++i) density += weights_[i] * component(means_[i], sigmas_[i]);
  return density;
}

double ParzenModel::pdf(const ParamValue& value) const {
  if (categorical_) return weights_[static_cast<std::size_t>(to_internal(value))];
  return pdf_internal(to_internal(value));
}

double ParzenModel::sample_internal(Rng& rng) const {
  if (categorical_) {
    double u = rng.uniform01();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (u < weights_[i]) return static_cast<double>(i);
      u -= weights_[i];
    }
    return static_cast<double>(weights_.size() - 1);
  }
  if (high_ <= low_) return low_;
  const auto component = std::min<std::size_t>(
      static_cast<std::size_t>(rng.uniform01() * static_cast<double>(weights_.size())), weights_.size() - 1);
  const bool prior = component == means_.size();
  const double mu = prior ? prior_mean() : means_[component];
  const double sigma = prior ? prior_sigma() : sigmas_[component];
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = mu + sigma * rng.normal();
    if (x >= low_ && x <= high_) return x;
  }
  return std::clamp(mu, low_, high_);
}

PrmMap suggest(const StudyState& study) {
  const std::uint64_t stream = mix_seed(study.seed, study.n_asked);
  if (study.history.size() < static_cast<std::size_t>(std::max(study.settings.n_startup, 1))) {
    Rng rng(stream);
    return sample_prior(study.space, rng);
  }

  const GoodBadSplit split = split_good_bad(study.history, study.settings.gamma);
  PrmMap out;
  for (const auto& [name, spec] : study.space) {
    Rng rng(mix_seed(stream, name_salt(name)));
    if (is_pinned(spec)) {
      out[name] = sample_one(spec, rng);
      continue;
    }
    std::vector<ParamValue> good_values, bad_values;
    for (const Observation& o : split.good) good_values.push_back(o.prm.at(name));
    for (const Observation& o : split.bad) bad_values.push_back(o.prm.at(name));
    const ParzenModel l = ParzenModel::fit(good_values, spec);
    const ParzenModel g = ParzenModel::fit(bad_values, spec);

    double best_score = -std::numeric_limits<double>::infinity();
    ParamValue best = sample_one(spec, rng);
    for (int c = 0; c < std::max(study.settings.n_candidates, 1); ++c) {
      const ParamValue candidate = l.from_internal(l.sample_internal(rng));
      const double score = std::log(l.pdf(candidate)) - std::log(g.pdf(candidate));
      if (score > best_score) {
        best_score = score;
        best = candidate;
      }
    }
    out[name] = std::move(best);
  }
  return out;
}

PrmMap ask(StudyState& study) {
  PrmMap prm = suggest(study);
  ++study.n_asked;
  return prm;
}

void observe(StudyState& study, PrmMap prm, double objective) {
  if (!std::isfinite(objective)) throw NonFinite("objective is not finite");
  if (!conforms(study.space, prm)) throw BadHyperparameter("observed prm does not conform to the search space");
  study.history.push_back(Observation{std::move(prm), objective});
}

nlohmann::json study_to_json(const StudyState& study) {
  nlohmann::json j;
  j["seed"] = study.seed;
  j["space"] = space_to_json(study.space);
  j["gamma"] = study.settings.gamma;
  j["n_startup"] = study.settings.n_startup;
  j["n_candidates"] = study.settings.n_candidates;
  j["n_asked"] = study.n_asked;
  j["history"] = nlohmann::json::array();
  for (const Observation& o : study.history) {
    j["history"].push_back({{"prm", prm_to_json(o.prm)}, {"objective", o.objective}});
  }
  return j;
}

StudyState study_from_json(const nlohmann::json& j) {
  StudyState s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.space = space_from_json(j.at("space"));
  s.settings.gamma = j.at("gamma").get<double>();
  s.settings.n_startup = j.at("n_startup").get<int>();
  s.settings.n_candidates = j.at("n_candidates").get<int>();
  s.n_asked = j.at("n_asked").get<std::uint64_t>();
  for (const auto& o : j.at("history")) {
    s.history.push_back(Observation{prm_from_json(o.at("prm")), o.at("objective").get<double>()});
  }
  return s;
}

}  // namespace lemur
