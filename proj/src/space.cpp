#include "lemur/space.hpp"

#include <algorithm>
#include <cmath>

#include "lemur/error.hpp"

namespace lemur {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const ParamSpec& spec) {
  std::visit(Overloaded{
                 [](const LogUniform& s) {
                   if (!(s.lo > 0) || !std::isfinite(s.hi) || s.lo > s.hi)
                     throw InvalidRange("log-uniform range needs 0 < lo <= hi");
                 },
                 [](const Uniform& s) {
                   if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || s.lo > s.hi)
                     throw InvalidRange("uniform range needs lo <= hi");
                 },
                 [](const IntPow2& s) {
                   if (s.pmin < 0 || s.pmax > 62 || s.pmin > s.pmax)
                     throw InvalidRange("binary power range needs 0 <= pmin <= pmax <= 62");
                 },
                 [](const Categorical& s) {
                   if (s.choices.empty()) throw EmptyChoiceSet("categorical has no choices");
                 },
             },
             spec);
}

void validate(const SearchSpace& space) {
  for (const auto& [name, spec] : space) validate(spec);
}

bool is_pinned(const ParamSpec& spec) {
  return std::visit(Overloaded{
                        [](const LogUniform& s) { return s.lo == s.hi; },
                        [](const Uniform& s) { return s.lo == s.hi; },
                        [](const IntPow2& s) { return s.pmin == s.pmax; },
                        [](const Categorical& s) { return s.choices.size() == 1; },
                    },
                    spec);
}

bool conforms(const ParamSpec& spec, const ParamValue& value) {
  return std::visit(
      Overloaded{
          [&](const LogUniform& s) {
            const double* d = std::get_if<double>(&value);
            return d && *d >= s.lo && *d <= s.hi;
          },
          [&](const Uniform& s) {
            const double* d = std::get_if<double>(&value);
            return d && *d >= s.lo && *d <= s.hi;
          },
          [&](const IntPow2& s) {
            const std::int64_t* i = std::get_if<std::int64_t>(&value);
            if (!i || *i <= 0) return false;
            std::uint64_t u = static_cast<std::uint64_t>(*i);
            if ((u & (u - 1)) != 0) return false;
            int k = 0;
            while ((u >> k) != 1) ++k;
            return k >= s.pmin && k <= s.pmax;
          },
          [&](const Categorical& s) {
            const std::string* t = std::get_if<std::string>(&value);
            return t && std::find(s.choices.begin(), s.choices.end(), *t) != s.choices.end();
          },
      },
      spec);
}

bool conforms(const SearchSpace& space, const PrmMap& prm) {
  if (space.size() != prm.size()) return false;
  for (const auto& [name, spec] : space) {
    auto it = prm.find(name);
    if (it == prm.end() || !conforms(spec, it->second)) return false;
  }
  return true;
}

nlohmann::json space_to_json(const SearchSpace& space) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, spec] : space) {
    j[name] = std::visit(
        Overloaded{
            [](const LogUniform& s) {
              return nlohmann::json{{"kind", "log_uniform"}, {"lo", s.lo}, {"hi", s.hi}};
            },
            [](const Uniform& s) {
              return nlohmann::json{{"kind", "uniform"}, {"lo", s.lo}, {"hi", s.hi}};
            },
            [](const IntPow2& s) {
              return nlohmann::json{{"kind", "int_pow2"}, {"pmin", s.pmin}, {"pmax", s.pmax}};
            },
            [](const Categorical& s) {
              return nlohmann::json{{"kind", "categorical"}, {"choices", s.choices}};
            },
        },
        spec);
  }
  return j;
}

SearchSpace space_from_json(const nlohmann::json& j) {
  SearchSpace space;
  for (const auto& [name, p] : j.items()) {
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "log_uniform") {
      space[name] = LogUniform{p.at("lo").get<double>(), p.at("hi").get<double>()};
    } else if (kind == "uniform") {
      space[name] = Uniform{p.at("lo").get<double>(), p.at("hi").get<double>()};
    } else if (kind == "int_pow2") {
      space[name] = IntPow2{p.at("pmin").get<int>(), p.at("pmax").get<int>()};
    } else if (kind == "categorical") {
      space[name] = Categorical{p.at("choices").get<std::vector<std::string>>()};
    } else {
      throw InvalidRange("unknown parameter kind '" + kind + "'");
    }
  }
  validate(space);
  return space;
}

}  // namespace lemur
