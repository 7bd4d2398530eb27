#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "lemur/error.hpp"
#include "lemur/report.hpp"

namespace lemur::report {
namespace {

void put_field(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

// Returns false at end of input. Quoted fields may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (true) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw MalformedDocument("unterminated quoted CSV field");
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
}

template <class T>
T parse_number(const std::string& s, const char* column) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw MalformedDocument(fmt::format("bad {} value '{}' in CSV", column, s));
  }
  return v;
}

}  // namespace

void write_csv(std::span<const ResultRow> rows, std::ostream& out) {
  for (std::size_t i = 0; i < kResultColumns.size(); ++i) {
    if (i) out << ',';
    out << kResultColumns[i];
  }
  out << "\r\n";
  for (const ResultRow& r : rows) {
    put_field(out, r.task);
    out << ',';
    put_field(out, r.dataset);
    out << ',';
    put_field(out, r.metric);
    out << ',';
    put_field(out, r.metric_code);
    out << ',';
    put_field(out, r.nn);
    out << ',';
    put_field(out, r.nn_code);
    out << ',' << r.epoch << ',' << fmt::format("{}", r.accuracy) << ',' << r.duration << ',';
    put_field(out, format_prm_kv(r.prm));
    out << ',';
    put_field(out, r.transform_code);
    out << "\r\n";
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!read_record(in, f)) throw MalformedDocument("CSV has no header");
  if (f.size() != kResultColumns.size()) throw MalformedDocument("CSV header has wrong column count");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] != kResultColumns[i]) throw MalformedDocument("unexpected CSV column '" + f[i] + "'");
  }
  std::vector<ResultRow> rows;
  while (read_record(in, f)) {
    if (f.size() != kResultColumns.size()) {
      throw MalformedDocument(fmt::format("CSV record {} has {} fields", rows.size() + 1, f.size()));
    }
    ResultRow r;
    r.task = f[0];
    r.dataset = f[1];
    r.metric = f[2];
    r.metric_code = f[3];
    r.nn = f[4];
    r.nn_code = f[5];
    r.epoch = parse_number<int>(f[6], "epoch");
    r.accuracy = parse_number<double>(f[7], "accuracy");
    r.duration = parse_number<std::int64_t>(f[8], "duration");
    r.prm = parse_prm_kv(f[9]);
    r.transform_code = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

void export_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(rows, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lemur::report
