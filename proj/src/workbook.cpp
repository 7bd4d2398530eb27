#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "lemur/error.hpp"
#include "lemur/report.hpp"
#include "zip.hpp"

namespace lemur::report {
namespace {

std::string xml_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default:
        // XML 1.0 forbids most C0 controls.
        if (static_cast<unsigned char>(ch) >= 0x20 || ch == '\t' || ch == '\n' || ch == '\r') out.push_back(ch);
    }
  }
  return out;
}

std::string column_letters(std::size_t index) {
  std::string s;
  ++index;
  while (index > 0) {
    const std::size_t rem = (index - 1) % 26;
    s.insert(s.begin(), static_cast<char>('A' + rem));
    index = (index - 1) / 26;
  }
  return s;
}

std::string string_cell(const std::string& ref, std::string_view text) {
  if (text.size() > kMaxCellChars) {
    throw std::invalid_argument(fmt::format("cell {} exceeds {} characters", ref, kMaxCellChars));
  }
  return fmt::format("<c r=\"{}\" t=\"inlineStr\"><is><t xml:space=\"preserve\">{}</t></is></c>", ref,
                     xml_text(text));
}

std::string cell_xml(const std::string& ref, const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return string_cell(ref, *s);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return fmt::format("<c r=\"{}\"><v>{}</v></c>", ref, *i);
  const double d = std::get<double>(cell);
  if (!std::isfinite(d)) return string_cell(ref, fmt::format("{}", d));
  return fmt::format("<c r=\"{}\"><v>{}</v></c>", ref, d);
}

std::string sheet_xml(const Sheet& sheet) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
      "<worksheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\"><sheetData>";
  auto emit_row = [&](std::size_t r, auto&& cells) {
    out += fmt::format("<row r=\"{}\">", r);
    std::size_t c = 0;
    for (const auto& cell : cells) {
      out += cell_xml(column_letters(c++) + std::to_string(r), Cell(cell));
    }
    out += "</row>";
  };
  emit_row(1, sheet.header);
  for (std::size_t i = 0; i < sheet.rows.size(); ++i) emit_row(i + 2, sheet.rows[i]);
  out += "</sheetData></worksheet>";
  return out;
}

void validate_sheets(const WorkbookSpec& w) {
  std::set<std::string> seen;
  bool any_rows = false;
  for (const Sheet& s : w.sheets) {
    if (s.name.empty() || s.name.size() > 31) {
      throw std::invalid_argument("sheet name must have 1 to 31 characters: '" + s.name + "'");
    }
    if (s.name.find_first_of("[]:*?/\\") != std::string::npos) {
      throw std::invalid_argument("sheet name has a forbidden character: '" + s.name + "'");
    }
    if (!seen.insert(s.name).second) throw std::invalid_argument("duplicate sheet name '" + s.name + "'");
    for (const auto& row : s.rows) {
      if (row.size() > s.header.size()) {
        throw std::invalid_argument("sheet '" + s.name + "' has a row wider than its header");
      }
    }
    any_rows = any_rows || !s.rows.empty();
  }
  if (!any_rows) throw EmptyWorkbook("workbook has no data rows");
}

Sheet manifest_sheet(std::vector<std::string> manifest) {
  Sheet s{"plots", {"file"}, {}};
  for (std::string& f : manifest) s.rows.push_back({Cell(std::move(f))});
  return s;
}

}  // namespace

WorkbookSpec aggregated_workbook(std::span<const stats::AggRow> rows, std::vector<std::string> manifest) {
  WorkbookSpec w;
  w.mode = WorkbookSpec::Mode::aggregated;
  Sheet summary{"summary",
                {"task", "dataset", "nn", "epoch", "n", "mean_accuracy", "std_accuracy", "mean_duration_ns",
                 "mean_duration_s"},
                {}};
  for (const stats::AggRow& r : rows) {
    summary.rows.push_back({r.key.task, r.key.dataset, r.key.nn, std::int64_t{r.key.epoch},
                            static_cast<std::int64_t>(r.n), r.mean, r.std, r.mean_duration_ns,
                            stats::ns_to_seconds(r.mean_duration_ns)});
  }
  w.sheets.push_back(std::move(summary));
  w.sheets.push_back(manifest_sheet(manifest));
  w.plot_manifest = std::move(manifest);
  return w;
}

WorkbookSpec raw_workbook(std::span<const ResultRow> rows, std::vector<std::string> manifest) {
  WorkbookSpec w;
  w.mode = WorkbookSpec::Mode::raw;
  Sheet raw{"raw", {kResultColumns.begin(), kResultColumns.end()}, {}};
  for (const ResultRow& r : rows) {
    raw.rows.push_back({r.task, r.dataset, r.metric, r.metric_code, r.nn, r.nn_code, std::int64_t{r.epoch},
                        r.accuracy, r.duration, format_prm_kv(r.prm), r.transform_code});
  }
  w.sheets.push_back(std::move(raw));
  w.sheets.push_back(manifest_sheet(manifest));
  w.plot_manifest = std::move(manifest);
  return w;
}

void export_workbook(const WorkbookSpec& w, const std::filesystem::path& path) {
  validate_sheets(w);
  std::vector<std::pair<std::string, std::string>> entries;

  std::string types =
      "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
      "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
      "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
      "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
      "<Override PartName=\"/xl/workbook.xml\" "
      "ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/>"
      "<Override PartName=\"/xl/styles.xml\" "
      "ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml\"/>";
  std::string sheets_xml;
  std::string rels =
      "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
      "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">";
  for (std::size_t i = 0; i < w.sheets.size(); ++i) {
    const std::size_t n = i + 1;
    types += fmt::format(
        "<Override PartName=\"/xl/worksheets/sheet{}.xml\" "
        "ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>",
        n);
    sheets_xml += fmt::format("<sheet name=\"{}\" sheetId=\"{}\" r:id=\"rId{}\"/>", xml_text(w.sheets[i].name), n, n);
    rels += fmt::format(
        "<Relationship Id=\"rId{}\" "
        "Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet\" "
        "Target=\"worksheets/sheet{}.xml\"/>",
        n, n);
  }
  rels += fmt::format(
      "<Relationship Id=\"rId{}\" "
      "Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles\" "
      "Target=\"styles.xml\"/></Relationships>",
      w.sheets.size() + 1);
  types += "</Types>";

  entries.emplace_back("[Content_Types].xml", std::move(types));
  entries.emplace_back("_rels/.rels",
                       "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                       "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
                       "<Relationship Id=\"rId1\" "
                       "Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument\" "
                       "Target=\"xl/workbook.xml\"/></Relationships>");
  entries.emplace_back("xl/workbook.xml",
                       "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                       "<workbook xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" "
                       "xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\"><sheets>" +
                           sheets_xml + "</sheets></workbook>");
  entries.emplace_back("xl/_rels/workbook.xml.rels", std::move(rels));
  entries.emplace_back("xl/styles.xml",
                       "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                       "<styleSheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\">"
                       "<fonts count=\"1\"><font><sz val=\"11\"/><name val=\"Calibri\"/></font></fonts>"
                       "<fills count=\"2\"><fill><patternFill patternType=\"none\"/></fill>"
                       "<fill><patternFill patternType=\"gray125\"/></fill></fills>"
                       "<borders count=\"1\"><border><left/><right/><top/><bottom/><diagonal/></border></borders>"
                       "<cellStyleXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\"/>"
                       "</cellStyleXfs>"
                       "<cellXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\"/>"
                       "</cellXfs><cellStyles count=\"1\"><cellStyle name=\"Normal\" xfId=\"0\" builtinId=\"0\"/></cellStyles>"
                       "</styleSheet>");
  for (std::size_t i = 0; i < w.sheets.size(); ++i) {
    entries.emplace_back(fmt::format("xl/worksheets/sheet{}.xml", i + 1), sheet_xml(w.sheets[i]));
  }

  const std::string archive = detail::zip_stored(entries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(archive.data(), static_cast<std::streamsize>(archive.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lemur::report
