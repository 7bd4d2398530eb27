#include "zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <stdexcept>

namespace lemur::detail {
namespace {

// 1980-01-01 00:00 in DOS format.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

void le16(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void le32(std::string& out, std::uint32_t v) {
  le16(out, v & 0xffff);
  le16(out, v >> 16);
}

}  // namespace

std::string zip_stored(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  std::string central;
  for (const auto& [name, data] : entries) {
    if (data.size() > 0xffffffffu || out.size() > 0xffffffffu) throw std::length_error("zip64 is not supported");
    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
    const auto size = static_cast<std::uint32_t>(data.size());
    const auto offset = static_cast<std::uint32_t>(out.size());

    le32(out, 0x04034b50);
    le16(out, 20);
    le16(out, 0x0800);  // UTF-8 names
    le16(out, 0);
    le16(out, kDosTime);
    le16(out, kDosDate);
    le32(out, crc);
    le32(out, size);
    le32(out, size);
    le16(out, static_cast<std::uint32_t>(name.size()));
    le16(out, 0);
    out += name;
    out += data;

    le32(central, 0x02014b50);
    le16(central, 20);
    le16(central, 20);
    le16(central, 0x0800);
    le16(central, 0);
    le16(central, kDosTime);
    le16(central, kDosDate);
    le32(central, crc);
    le32(central, size);
    le32(central, size);
    le16(central, static_cast<std::uint32_t>(name.size()));
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le16(central, 0);
    le32(central, 0);
    le32(central, offset);
    central += name;
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  le32(out, 0x06054b50);
  le16(out, 0);
  le16(out, 0);
  le16(out, static_cast<std::uint32_t>(entries.size()));
  le16(out, static_cast<std::uint32_t>(entries.size()));
  le32(out, static_cast<std::uint32_t>(central.size()));
  le32(out, central_offset);
  le16(out, 0);
  return out;
}

}  // namespace lemur::detail
