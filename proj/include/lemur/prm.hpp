#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace lemur {

// A hyperparameter value: real, integer or token.
using ParamValue = std::variant<double, std::int64_t, std::string>;
using PrmMap = std::map<std::string, ParamValue>;

// Tokens must not be readable as numbers and must not contain the
// separators used by the flat `key=value;...` form.
bool is_prm_token(std::string_view s);
bool is_prm_key(std::string_view s);

// Throws MalformedDocument on non-finite reals, bad keys or bad tokens.
void validate_prm(const PrmMap& prm);

// Shortest round-trip text of one value. Reals always carry a '.' or an
// exponent so they never read back as integers.
std::string format_value(const ParamValue& v);
ParamValue parse_value(std::string_view text);

// Sorted-key JSON object text; the input to prm_hash.
std::string canonical_json(const PrmMap& prm);
// SHA-256 hex of canonical_json.
std::string prm_hash(const PrmMap& prm);

// `key=value` pairs joined by ';', keys sorted.
std::string format_prm_kv(const PrmMap& prm);
PrmMap parse_prm_kv(std::string_view text);

nlohmann::json prm_to_json(const PrmMap& prm);
// Accepts a flat object of numbers and strings.
PrmMap prm_from_json(const nlohmann::json& j);

double as_real(const ParamValue& v);

}  // namespace lemur
