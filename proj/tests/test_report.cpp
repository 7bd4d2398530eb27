#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lemur/error.hpp"
#include "lemur/report.hpp"
#include "support.hpp"

namespace lemur::report {
namespace {

using testing::TempDir;

const std::filesystem::path kFixture = std::filesystem::path(FIXTURE_DIR) / "paper_tables.json";

Series xy(std::string name, std::vector<double> x, std::vector<double> y) {
  return Series{std::move(name), {{"x", std::move(x)}, {"y", std::move(y)}}};
}

std::vector<ResultRow> fixture_rows() {
  TempDir dir;
  Registry r = Registry::open(dir.path());
  r.load_fixture(kFixture);
  return r.query_data({});
}

// A few models with several epochs and distinct durations.
std::vector<ResultRow> trial_rows() {
  std::vector<ResultRow> rows;
  Rng rng(17);
  for (const char* nn : {"A", "B", "C"}) {
    for (int t = 0; t < 3; ++t) {
      for (int e = 1; e <= 4; ++e) {
        ResultRow r;
        r.task = "img-classification";
        r.dataset = "blobs";
        r.metric = "acc";
        r.nn = nn;
        r.epoch = e;
        r.accuracy = rng.uniform01();
        r.duration = rng.uniform_int(1'000'000, 9'000'000);
        r.prm = {{"lr", rng.uniform(0.001, 0.1)}, {"batch", std::int64_t{16}}};
        rows.push_back(r);
      }
    }
  }
  return rows;
}

TEST(Svg, ScatterHasOneMarkPerPoint) {
  PlotSpec p;
  p.kind = PlotKind::scatter_acc_epoch;
  p.series = {xy("a", {1, 2, 3, 4}, {0.1, 0.2, 0.3, 0.4}), xy("b", {1, 2, 3}, {0.5, 0.6, 0.7})};
  const auto tree = testing::parse_xml(render_svg(p));
  EXPECT_EQ(testing::count_class(tree, "mark"), 7u);
  EXPECT_EQ(expected_mark_count(p), 7u);
  EXPECT_FALSE(tree.get<std::string>("svg.<xmlattr>.viewBox", "").empty());
}

TEST(Svg, BoxPlotTukeyWhiskers) {
  const std::vector<double> v{1, 2, 3, 4, 100};
  const BoxStats b = box_stats(v);
  EXPECT_EQ(b.q1, 2.0);
  EXPECT_EQ(b.median, 3.0);
  EXPECT_EQ(b.q3, 4.0);
  EXPECT_EQ(b.whisker_lo, 1.0);
  EXPECT_EQ(b.whisker_hi, 4.0);
  EXPECT_EQ(b.outliers, std::vector<double>{100.0});

  PlotSpec p;
  p.kind = PlotKind::box_acc_epoch;
  p.series = {Series{"s", {{"value", v}}}};
  const auto tree = testing::parse_xml(render_svg(p));
  std::vector<std::string> whisker_lo, whisker_hi, outliers;
  testing::walk_xml(tree, [&](const std::string&, const boost::property_tree::ptree& el) {
    if (testing::has_class(el, "whisker")) {
      whisker_lo.push_back(el.get<std::string>("<xmlattr>.data-lo"));
      whisker_hi.push_back(el.get<std::string>("<xmlattr>.data-hi"));
    }
    if (testing::has_class(el, "outlier")) outliers.push_back(el.get<std::string>("<xmlattr>.data-value"));
  });
  ASSERT_FALSE(whisker_lo.empty());
  EXPECT_DOUBLE_EQ(std::stod(whisker_lo[0]), 1.0);
  EXPECT_DOUBLE_EQ(std::stod(whisker_hi[0]), 4.0);
  ASSERT_EQ(outliers.size(), 1u);
  EXPECT_DOUBLE_EQ(std::stod(outliers[0]), 100.0);
  EXPECT_EQ(testing::count_class(tree, "mark"), 1u);
}

TEST(Svg, QuantileInterpolates) {
  const std::vector<double> s{1, 2, 3, 4};
  EXPECT_EQ(quantile(s, 0.0), 1.0);
  EXPECT_EQ(quantile(s, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(s, 0.25), 1.75);
}

TEST(Svg, HeatmapAnnotatesDiagonal) {
  PlotSpec p;
  p.kind = PlotKind::corr_heatmap;
  p.series = {Series{"a", {{"r", {1.0, 0.0}}}}, Series{"b", {{"r", {0.0, 1.0}}}}};
  const auto tree = testing::parse_xml(render_svg(p));
  EXPECT_EQ(testing::count_class(tree, "mark"), 4u);
  std::vector<std::string> labels;
  testing::walk_xml(tree, [&](const std::string&, const boost::property_tree::ptree& el) {
    if (testing::has_class(el, "annotation")) labels.push_back(el.get_value<std::string>());
  });
  EXPECT_EQ(labels, (std::vector<std::string>{"1.00", "0.00", "0.00", "1.00"}));
}

TEST(Svg, HeatmapUndefinedCell) {
  PlotSpec p;
  p.kind = PlotKind::corr_heatmap;
  p.series = {Series{"a", {{"r", {1.0, NAN}}}}, Series{"b", {{"r", {NAN, NAN}}}}};
  const std::string svg = render_svg(p);
  EXPECT_NE(svg.find("n/a"), std::string::npos);
}

TEST(Svg, EscapesText) {
  PlotSpec p;
  p.kind = PlotKind::scatter_acc_epoch;
  p.title = "a < b & \"c\"";
  p.series = {xy("<script>", {1}, {0.5})};
  EXPECT_NO_THROW(testing::parse_xml(render_svg(p)));
}

TEST(Svg, ValidationErrors) {
  PlotSpec empty;
  empty.kind = PlotKind::histogram_acc;
  EXPECT_THROW(render_svg(empty), EmptySeries);
  PlotSpec missing;
  missing.kind = PlotKind::mean_std_band;
  missing.series = {xy("a", {1}, {0.5})};
  EXPECT_THROW(render_svg(missing), std::invalid_argument);
  PlotSpec ragged;
  ragged.series = {xy("a", {1, 2}, {0.5})};
  EXPECT_THROW(render_svg(ragged), std::invalid_argument);
  PlotSpec nonfinite;
  nonfinite.series = {xy("a", {1}, {NAN})};
  EXPECT_THROW(render_svg(nonfinite), std::invalid_argument);
}

TEST(Svg, KindNames) {
  EXPECT_EQ(all_plot_kinds().size(), 9u);
  for (PlotKind k : all_plot_kinds()) EXPECT_EQ(plot_kind_from(to_string(k)), k);
  EXPECT_FALSE(plot_kind_from("pie").has_value());
}

// Every kind, built from stored rows, parses and has the promised number
// of marks.
TEST(SvgProperty, EveryKindFromRows) {
  for (const auto& rows : {trial_rows(), fixture_rows()}) {
    for (PlotKind k : all_plot_kinds()) {
      const PlotSpec p = plot_from_rows(k, rows);
      const auto tree = testing::parse_xml(render_svg(p));
      EXPECT_EQ(testing::count_class(tree, "mark"), expected_mark_count(p)) << to_string(k);
    }
  }
  const PlotSpec scatter = plot_from_rows(PlotKind::scatter_acc_epoch, trial_rows());
  EXPECT_EQ(expected_mark_count(scatter), trial_rows().size());
  EXPECT_THROW(plot_from_rows(PlotKind::histogram_acc, std::vector<ResultRow>{}), EmptySeries);
}

TEST(SvgProperty, RandomScatterCounts) {
  Rng rng(301);
  for (int i = 0; i < 50; ++i) {
    PlotSpec p;
    p.kind = i % 2 ? PlotKind::scatter_acc_duration : PlotKind::line_acc_time;
    std::size_t total = 0;
    for (int s = 0, n = static_cast<int>(rng.uniform_int(1, 5)); s < n; ++s) {
      std::vector<double> x, y;
      for (int j = 0, m = static_cast<int>(rng.uniform_int(1, 30)); j < m; ++j) {
        x.push_back(static_cast<double>(j));
        y.push_back(rng.uniform01());
      }
      total += x.size();
      p.series.push_back(xy("s" + std::to_string(s), x, y));
    }
    EXPECT_EQ(testing::count_class(testing::parse_xml(render_svg(p)), "mark"), total);
  }
}

TEST(Csv, HeaderOnlyForEmptyInput) {
  std::ostringstream out;
  write_csv(std::vector<ResultRow>{}, out);
  EXPECT_EQ(out.str(), "task,dataset,metric,metric_code,nn,nn_code,epoch,accuracy,duration,prm,transform_code\r\n");
  std::istringstream in(out.str());
  EXPECT_TRUE(read_csv(in).empty());
}

TEST(Csv, QuotesAndRoundTrips) {
  ResultRow r;
  r.task = "t";
  r.dataset = "d";
  r.metric = "acc";
  r.metric_code = "line one\nline \"two\", with comma\n";
  r.nn = "N";
  r.nn_code = "x";
  r.epoch = 3;
  r.accuracy = 0.1 + 0.2;
  r.duration = 123456789;
  r.prm = {{"lr", 0.01}, {"batch", std::int64_t{8}}, {"transform", std::string("flip")}};
  r.transform_code = "";
  std::ostringstream out;
  write_csv(std::vector<ResultRow>{r}, out);
  EXPECT_NE(out.str().find("\"line one\nline \"\"two\"\", with comma\n\""), std::string::npos);
  EXPECT_NE(out.str().find("batch=8;lr=0.01;transform=flip"), std::string::npos);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Csv, FixtureRoundTripThroughFile) {
  TempDir dir;
  const auto rows = fixture_rows();
  export_csv(rows, dir / "out.csv");
  std::ifstream in(dir / "out.csv", std::ios::binary);
  EXPECT_EQ(read_csv(in), rows);
  EXPECT_THROW(export_csv(rows, dir / "missing" / "out.csv"), IoError);
}

TEST(Csv, RejectsMalformed) {
  std::istringstream wrong_header("a,b\r\n");
  EXPECT_THROW(read_csv(wrong_header), MalformedDocument);
  std::istringstream unterminated(
      "task,dataset,metric,metric_code,nn,nn_code,epoch,accuracy,duration,prm,transform_code\r\n\"open");
  EXPECT_THROW(read_csv(unterminated), MalformedDocument);
}

TEST(CsvProperty, RandomRowsRoundTrip) {
  Rng rng(302);
  for (int i = 0; i < 300; ++i) {
    const TrialDocument d = testing::random_document(rng);
    std::vector<ResultRow> rows;
    for (const EpochResult& e : d.epochs) {
      rows.push_back(ResultRow{d.config.task, d.config.dataset, d.config.metric, d.codes.at(CodeKind::metric),
                               d.config.nn, d.codes.at(CodeKind::nn), e.epoch, e.accuracy, e.duration_ns, d.prm,
                               d.codes.at(CodeKind::transform)});
    }
    std::ostringstream out;
    write_csv(rows, out);
    std::istringstream in(out.str());
    EXPECT_EQ(read_csv(in), rows);
  }
}

struct Unzipped {
  std::map<std::string, std::string> files;
  std::vector<std::string> sheet_names;
  std::vector<std::size_t> row_counts;
};

Unzipped unzip_workbook(const std::filesystem::path& path) {
  Unzipped u;
  u.files = testing::read_stored_zip(testing::read_file(path));
  const auto wb = testing::parse_xml(u.files.at("xl/workbook.xml"));
  for (const auto& [tag, sheet] : wb.get_child("workbook.sheets")) {
    if (tag != "sheet") continue;
    u.sheet_names.push_back(sheet.get<std::string>("<xmlattr>.name"));
    const auto ws = testing::parse_xml(u.files.at("xl/worksheets/sheet" + sheet.get<std::string>("<xmlattr>.sheetId") + ".xml"));
    std::size_t rows = 0;
    for (const auto& [rtag, r] : ws.get_child("worksheet.sheetData")) rows += rtag == "row";
    u.row_counts.push_back(rows);
  }
  return u;
}

TEST(Workbook, AggregatedSheetsAndRows) {
  TempDir dir;
  std::vector<ResultRow> rows;
  for (int e = 1; e <= 3; ++e) {
    ResultRow r;
    r.task = "t";
    r.dataset = "d";
    r.nn = "N";
    r.epoch = e;
    r.accuracy = 0.5;
    rows.push_back(r);
  }
  const auto agg = stats::aggregate(rows);
  ASSERT_EQ(agg.size(), 3u);
  export_workbook(aggregated_workbook(agg, {"a.svg", "b.svg"}), dir / "w.xlsx");
  const Unzipped u = unzip_workbook(dir / "w.xlsx");
  EXPECT_EQ(u.sheet_names, (std::vector<std::string>{"summary", "plots"}));
  EXPECT_EQ(u.row_counts, (std::vector<std::size_t>{4, 3}));
  EXPECT_TRUE(u.files.count("[Content_Types].xml"));
  EXPECT_TRUE(u.files.count("xl/styles.xml"));
}

TEST(Workbook, RawFixtureContainsAlexNet) {
  TempDir dir;
  const auto rows = fixture_rows();
  export_workbook(raw_workbook(rows, {}), dir / "raw.xlsx");
  const Unzipped u = unzip_workbook(dir / "raw.xlsx");
  EXPECT_EQ(u.sheet_names, (std::vector<std::string>{"raw", "plots"}));
  EXPECT_EQ(u.row_counts[0], rows.size() + 1);
  const std::string& sheet = u.files.at("xl/worksheets/sheet1.xml");
  const auto pos = sheet.find(">AlexNet<");
  ASSERT_NE(pos, std::string::npos);
  const auto row_end = sheet.find("</row>", pos);
  EXPECT_NE(sheet.substr(pos, row_end - pos).find("<v>0.8675</v>"), std::string::npos);
}

TEST(Workbook, Guards) {
  TempDir dir;
  WorkbookSpec empty;
  empty.sheets = {Sheet{"a", {"x"}, {}}};
  EXPECT_THROW(export_workbook(empty, dir / "e.xlsx"), EmptyWorkbook);
  WorkbookSpec bad;
  bad.sheets = {Sheet{"a/b", {"x"}, {{Cell(1.0)}}}};
  EXPECT_THROW(export_workbook(bad, dir / "b.xlsx"), std::invalid_argument);
  WorkbookSpec longname;
  longname.sheets = {Sheet{std::string(32, 'x'), {"x"}, {{Cell(1.0)}}}};
  EXPECT_THROW(export_workbook(longname, dir / "l.xlsx"), std::invalid_argument);
  WorkbookSpec dup;
  dup.sheets = {Sheet{"s", {"x"}, {{Cell(1.0)}}}, Sheet{"s", {"x"}, {}}};
  EXPECT_THROW(export_workbook(dup, dir / "d.xlsx"), std::invalid_argument);
  WorkbookSpec ok;
  ok.sheets = {Sheet{"s", {"x"}, {{Cell(1.0)}}}};
  EXPECT_THROW(export_workbook(ok, dir / "no" / "x.xlsx"), IoError);
}

}  // namespace
}  // namespace lemur::report
