#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lemur/prm.hpp"

namespace lemur {

struct LogUniform {
  double lo;
  double hi;
  friend bool operator==(const LogUniform&, const LogUniform&) = default;
};

struct Uniform {
  double lo;
  double hi;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

// Values 2^k for integer k in [pmin, pmax].
struct IntPow2 {
  int pmin;
  int pmax;
  friend bool operator==(const IntPow2&, const IntPow2&) = default;
};

struct Categorical {
  std::vector<std::string> choices;
  friend bool operator==(const Categorical&, const Categorical&) = default;
};

using ParamSpec = std::variant<LogUniform, Uniform, IntPow2, Categorical>;
using SearchSpace = std::map<std::string, ParamSpec>;

// Throws InvalidRange or EmptyChoiceSet.
void validate(const ParamSpec& spec);
void validate(const SearchSpace& space);

bool is_pinned(const ParamSpec& spec);
bool conforms(const ParamSpec& spec, const ParamValue& value);
// Same key set and every value inside its domain.
bool conforms(const SearchSpace& space, const PrmMap& prm);

nlohmann::json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);

}  // namespace lemur
