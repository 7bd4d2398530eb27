#pragma once

#include <string>
#include <string_view>

namespace lemur {

std::string sha256_hex(std::string_view data);

// Strips trailing whitespace on every line and guarantees a final newline.
// Code entity ids hash this form.
std::string normalize_code(std::string_view code);

inline std::string code_id(std::string_view code) {
  return sha256_hex(normalize_code(code));
}

}  // namespace lemur
