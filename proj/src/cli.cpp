#include "lemur/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lemur/config.hpp"
#include "lemur/error.hpp"
#include "lemur/harness.hpp"
#include "lemur/registry.hpp"
#include "lemur/report.hpp"
#include "lemur/stats.hpp"

#ifndef LEMUR_DEFAULT_FIXTURE
#define LEMUR_DEFAULT_FIXTURE "fixtures/paper_tables.json"
#endif

namespace lemur {
namespace {

constexpr const char* kIdentityTransform = "identity";
constexpr const char* kIdentityCode = "transform: identity\nreturns every sample unchanged\n";

struct UsageError : Error {
  using Error::Error;
};

struct PluginStartError : Error {
  using Error::Error;
};

std::string self_exe() {
  std::error_code ec;
  auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) throw SpawnError("cannot locate own executable: " + ec.message());
  return p.string();
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<int> parse_shape(const std::string& s, const char* flag) {
  std::vector<int> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects comma-separated positive integers");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " must not be empty");
  return out;
}

Registry open_existing(const std::filesystem::path& db) {
  if (!std::filesystem::exists(db)) throw IoError("no database at " + db.string());
  return Registry::open(db);
}

nlohmann::json row_to_json(const ResultRow& r) {
  return {{"task", r.task},       {"dataset", r.dataset},   {"metric", r.metric},
          {"metric_code", r.metric_code}, {"nn", r.nn},     {"nn_code", r.nn_code},
          {"epoch", r.epoch},     {"accuracy", r.accuracy}, {"duration", r.duration},
          {"prm", prm_to_json(r.prm)},    {"transform_code", r.transform_code}};
}

nlohmann::json report_to_json(const IngestReport& r) {
  return {{"inserted", r.inserted}, {"duplicates", r.duplicates}, {"conflicts", r.conflicts}};
}

struct Filters {
  std::string task, dataset, metric, nn;

  void attach(CLI::App* cmd) {
    cmd->add_option("--task", task, "Only this task");
    cmd->add_option("--dataset", dataset, "Only this dataset");
    cmd->add_option("--metric", metric, "Only this metric");
    cmd->add_option("--nn", nn, "Only this model");
  }

  QueryFilter filter(bool best) const {
    QueryFilter f;
    if (!task.empty()) f.task = task;
    if (!dataset.empty()) f.dataset = dataset;
    if (!metric.empty()) f.metric = metric;
    if (!nn.empty()) f.nn = nn;
    f.only_best_accuracy = best;
    return f;
  }
};

std::vector<nlohmann::json> read_documents(const std::string& source) {
  std::string text;
  if (source == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError("cannot read " + source);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<nlohmann::json> docs;
  nlohmann::json whole = nlohmann::json::parse(text, nullptr, false);
  if (!whole.is_discarded()) {
    if (whole.is_array()) {
      for (auto& d : whole) docs.push_back(std::move(d));
    } else {
      docs.push_back(std::move(whole));
    }
    return docs;
  }
  // One document per line.
  std::istringstream lines(text);
  int n = 0;
  for (std::string line; std::getline(lines, line);) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedDocument(source + ":" + std::to_string(n) + ": not JSON");
    docs.push_back(std::move(j));
  }
  return docs;
}

std::vector<std::string> svg_manifest(const std::string& dir) {
  std::vector<std::string> out;
  if (dir.empty()) return out;
  if (!std::filesystem::is_directory(dir)) throw IoError("no plot directory at " + dir);
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".svg") out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Benchmark runner and experiment registry"};
  app.require_subcommand(1, 1);
  std::string db = "lemur.db";
  app.add_option("--db", db, "Database file or directory")->envname("LEMUR_DB");

  // run
  auto* run = app.add_subcommand("run", "Run a hyperparameter study");
  std::string config_text;
  RangeArgs ranges;
  std::string transform;
  std::string plugin_cmd;
  std::string in_shape = "2", out_shape = "3";
  std::uint64_t seed = 1;
  bool fresh = false;
  bool quiet = false;
  long long timeout_ms = harness::kDefaultEpochTimeout.count();
  std::string checkpoint;
  run->add_option("-c,--config", config_text, "<task>_<dataset>_<metric>_<nn>")->required();
  run->add_option("--min_learning_rate", ranges.min_learning_rate);
  run->add_option("--max_learning_rate", ranges.max_learning_rate);
  run->add_option("--min_batch_binary_power", ranges.min_batch_binary_power);
  run->add_option("--max_batch_binary_power", ranges.max_batch_binary_power);
  run->add_option("--min_momentum", ranges.min_momentum);
  run->add_option("--max_momentum", ranges.max_momentum);
  run->add_option("--transform", transform, "Pin one registered transform");
  run->add_option("--trials", ranges.trials, "Number of trials");
  run->add_option("--epochs", ranges.max_epochs, "Epochs per trial (1-50)");
  run->add_option("--plugin", plugin_cmd, "Trainer command line; defaults to the built-in trainer");
  run->add_option("--in-shape", in_shape, "Model input shape, comma separated");
  run->add_option("--out-shape", out_shape, "Model output shape, comma separated");
  run->add_option("--seed", seed, "Sampler seed");
  run->add_option("--epoch-timeout-ms", timeout_ms, "Longest wait for one plugin event");
  run->add_option("--checkpoint", checkpoint, "Checkpoint file");
  run->add_flag("--fresh", fresh, "Discard an existing checkpoint");
  run->add_flag("-q,--quiet", quiet, "No per-trial progress on stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Store trial documents (JSON, JSON array or JSON lines)");
  std::vector<std::string> ingest_files;
  bool overwrite = false;
  ingest->add_option("files", ingest_files, "Files to read, - for stdin")->required();
  ingest->add_flag("--force", overwrite, "Replace conflicting rows instead of failing");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Load the reference result tables");
  std::string fixture_file = LEMUR_DEFAULT_FIXTURE;
  fixture->add_option("--file", fixture_file, "Fixture JSON");

  // query
  auto* query = app.add_subcommand("query", "Print stored results");
  Filters query_filters;
  bool best = false;
  std::string format = "json";
  query_filters.attach(query);
  query->add_flag("--best", best, "Best row per model");
  query->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Print per-epoch aggregates");
  Filters stats_filters;
  stats_filters.attach(stats_cmd);

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG charts");
  Filters plot_filters;
  std::vector<std::string> kinds;
  std::string plot_dir = "plots";
  plot_filters.attach(plot);
  plot->add_option("--kind", kinds, "Plot kind, repeatable; all kinds when omitted");
  plot->add_option("--out", plot_dir, "Output directory");

  // export
  auto* exp = app.add_subcommand("export", "Write a workbook or CSV file");
  Filters export_filters;
  std::string mode = "aggregated";
  std::string export_out;
  std::string manifest_dir;
  export_filters.attach(exp);
  exp->add_option("--mode", mode)->check(CLI::IsMember({"aggregated", "raw", "csv"}));
  exp->add_option("--out", export_out, "Output file")->required();
  exp->add_option("--plots", manifest_dir, "Directory whose SVG files form the plot manifest");

  // Built-in trainer, spawned by `run`.
  auto* trainer = app.add_subcommand("reference-trainer", "");
  trainer->group("");
  long long delay_ms = 0;
  trainer->add_option("--epoch-delay-ms", delay_ms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*trainer) {
    harness::ReferenceOptions opts;
    opts.epoch_delay = std::chrono::milliseconds(delay_ms);
    return harness::serve_reference_trainer(std::cin, std::cout, opts);
  }

  if (*run) {
    const ConfigId config = parse_config(config_text);
    if (!transform.empty()) ranges.transform = transform;
    validate(ranges);
    harness::PluginDescriptor plugin;
    plugin.command = plugin_cmd.empty() ? std::vector<std::string>{self_exe(), "reference-trainer"}
                                        : split_words(plugin_cmd);
    plugin.nn_name = config.nn;
    plugin.in_shape = parse_shape(in_shape, "--in-shape");
    plugin.out_shape = parse_shape(out_shape, "--out-shape");
    if (timeout_ms <= 0) throw UsageError("--epoch-timeout-ms must be positive");
    plugin.epoch_timeout = std::chrono::milliseconds(timeout_ms);

    Registry reg = Registry::open(db);
    std::vector<std::string> transforms;
    for (const CodeEntity& c : reg.list_codes(CodeKind::transform)) {
      if (c.name != kFixtureTransform) transforms.push_back(c.name);
    }
    if ((transforms.empty() && !ranges.transform) || ranges.transform == std::optional<std::string>(kIdentityTransform)) {
      reg.ensure_code(CodeKind::transform, kIdentityTransform, kIdentityCode);
      if (transforms.empty()) transforms.push_back(kIdentityTransform);
    }

    harness::StudyRun study;
    study.config = config;
    study.space = space_from_args(ranges, transforms);
    study.trials = ranges.trials;
    study.max_epochs = ranges.max_epochs;
    study.seed = seed;
    study.registry = &reg;
    study.plugin = plugin;
    study.checkpoint =
        checkpoint.empty() ? harness::default_checkpoint_path(reg.path(), config, seed) : std::filesystem::path(checkpoint);
    if (fresh) std::filesystem::remove(study.checkpoint);

    try {
      auto probe = harness::PluginSession::launch(plugin);
      harness::restrict_space(study.space, harness::handshake(probe));
    } catch (const Error& e) {
      throw PluginStartError(e.what());
    }

    const auto summary = harness::run_study(study, [&](int index, const TrialDocument& doc, bool failed) {
      if (quiet) return;
      std::cerr << "trial " << index << "/" << study.trials << (failed ? " failed" : "") << ": "
                << format_prm_kv(doc.prm) << ";transform=" << doc.transform;
      if (!doc.epochs.empty()) std::cerr << " accuracy=" << doc.epochs.back().accuracy;
      std::cerr << '\n';
    });
    std::cout << harness::summary_to_json(summary).dump() << '\n';
    return kExitOk;
  }

  if (*ingest) {
    Registry reg = Registry::open(db);
    IngestReport total;
    for (const std::string& f : ingest_files) {
      for (const nlohmann::json& j : read_documents(f)) {
        total += reg.ingest_trial(trial_from_json(j), overwrite ? OnConflict::overwrite : OnConflict::reject);
      }
    }
    std::cout << report_to_json(total).dump() << '\n';
    return kExitOk;
  }

  if (*fixture) {
    Registry reg = Registry::open(db);
    std::cout << report_to_json(reg.load_fixture(fixture_file)).dump() << '\n';
    return kExitOk;
  }

  if (*query) {
    Registry reg = open_existing(db);
    const auto rows = reg.query_data(query_filters.filter(best));
    if (format == "csv") {
      report::write_csv(rows, std::cout);
    } else {
      nlohmann::json out = nlohmann::json::array();
      for (const ResultRow& r : rows) out.push_back(row_to_json(r));
      std::cout << out.dump() << '\n';
    }
    return kExitOk;
  }

  if (*stats_cmd) {
    Registry reg = open_existing(db);
    const auto rows = reg.query_data(stats_filters.filter(false));
    nlohmann::json out = nlohmann::json::array();
    for (const stats::AggRow& a : stats::aggregate(rows)) {
      out.push_back({{"task", a.key.task},
                     {"dataset", a.key.dataset},
                     {"nn", a.key.nn},
                     {"epoch", a.key.epoch},
                     {"n", a.n},
                     {"mean", a.mean},
                     {"std", a.std},
                     {"mean_duration_ns", a.mean_duration_ns}});
    }
    std::cout << out.dump() << '\n';
    return kExitOk;
  }

  if (*plot) {
    std::vector<report::PlotKind> selected;
    for (const std::string& k : kinds) {
      auto kind = report::plot_kind_from(k);
      if (!kind) throw UsageError("unknown plot kind '" + k + "'");
      selected.push_back(*kind);
    }
    if (selected.empty()) {
      auto all = report::all_plot_kinds();
      selected.assign(all.begin(), all.end());
    }
    Registry reg = open_existing(db);
    const auto rows = reg.query_data(plot_filters.filter(false));
    std::error_code ec;
    std::filesystem::create_directories(plot_dir, ec);
    if (ec) throw IoError("cannot create " + plot_dir + ": " + ec.message());
    for (report::PlotKind kind : selected) {
      const auto path = std::filesystem::path(plot_dir) / (std::string(report::to_string(kind)) + ".svg");
      write_text(path, report::render_svg(report::plot_from_rows(kind, rows)));
      std::cout << path.string() << '\n';
    }
    return kExitOk;
  }

  if (*exp) {
    Registry reg = open_existing(db);
    const auto rows = reg.query_data(export_filters.filter(false));
    if (mode == "csv") {
      report::export_csv(rows, export_out);
    } else if (mode == "raw") {
      report::export_workbook(report::raw_workbook(rows, svg_manifest(manifest_dir)), export_out);
    } else {
      const auto agg = stats::aggregate(rows);
      report::export_workbook(report::aggregated_workbook(agg, svg_manifest(manifest_dir)), export_out);
    }
    std::cout << export_out << '\n';
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int run_cli(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const PluginStartError& e) {
    std::cerr << "error: plugin handshake failed: " << e.what() << '\n';
    return kExitPlugin;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MalformedConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace lemur
