#include "lemur/prm.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "lemur/error.hpp"
#include "lemur/hash.hpp"

namespace lemur {
namespace {

bool parses_as_integer(std::string_view s, std::int64_t* out = nullptr) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return false;
  if (out) *out = v;
  return true;
}

bool parses_as_real(std::string_view s, double* out = nullptr) {
  if (s.empty()) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  if (out) *out = v;
  return true;
}

bool forbidden_char(char ch) {
  return ch == ';' || ch == '=' || ch == ',' || ch == '"' ||
         static_cast<unsigned char>(ch) <= 0x20 || ch == 0x7f;
}

}  // namespace

bool is_prm_token(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (forbidden_char(ch)) return false;
  return !parses_as_integer(s) && !parses_as_real(s);
}

bool is_prm_key(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (forbidden_char(ch)) return false;
  return true;
}

void validate_prm(const PrmMap& prm) {
  for (const auto& [key, value] : prm) {
    if (!is_prm_key(key)) throw MalformedDocument("invalid prm key '" + key + "'");
    if (const double* d = std::get_if<double>(&value); d && !std::isfinite(*d)) {
      throw MalformedDocument("prm '" + key + "' is not finite");
    }
    if (const std::string* s = std::get_if<std::string>(&value); s && !is_prm_token(*s)) {
      throw MalformedDocument("prm '" + key + "' has invalid token '" + *s + "'");
    }
  }
}

std::string format_value(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return nlohmann::json(*d).dump();
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

ParamValue parse_value(std::string_view text) {
  std::int64_t i = 0;
  if (parses_as_integer(text, &i)) return i;
  double d = 0;
  if (parses_as_real(text, &d)) return d;
  return std::string(text);
}

std::string canonical_json(const PrmMap& prm) { return prm_to_json(prm).dump(); }

std::string prm_hash(const PrmMap& prm) { return sha256_hex(canonical_json(prm)); }

std::string format_prm_kv(const PrmMap& prm) {
  std::string out;
  for (const auto& [key, value] : prm) {
    if (!out.empty()) out.push_back(';');
    out += key;
    out.push_back('=');
    out += format_value(value);
  }
  return out;
}

PrmMap parse_prm_kv(std::string_view text) {
  PrmMap out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t semi = text.find(';', pos);
    std::string_view pair = text.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos);
    std::size_t eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw MalformedDocument("bad prm pair '" + std::string(pair) + "'");
    }
    out[std::string(pair.substr(0, eq))] = parse_value(pair.substr(eq + 1));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return out;
}

nlohmann::json prm_to_json(const PrmMap& prm) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : prm) {
    std::visit([&](const auto& v) { j[key] = v; }, value);
  }
  return j;
}

PrmMap prm_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MalformedDocument("prm must be a JSON object");
  PrmMap out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number_integer()) {
      out[key] = value.get<std::int64_t>();
    } else if (value.is_number_float()) {
      out[key] = value.get<double>();
    } else if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else {
      throw MalformedDocument("prm '" + key + "' must be a number or string");
    }
  }
  validate_prm(out);
  return out;
}

double as_real(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw BadHyperparameter("expected a numeric value, got '" + std::get<std::string>(v) + "'");
}

}  // namespace lemur
