#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lemur::detail {

// Uncompressed ZIP archive with fixed timestamps, so equal input gives
// byte-identical output.
std::string zip_stored(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace lemur::detail
