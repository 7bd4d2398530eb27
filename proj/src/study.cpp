#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "lemur/error.hpp"
#include "lemur/harness.hpp"

namespace lemur::harness {
namespace {

constexpr int kCheckpointVersion = 1;

struct Progress {
  StudyState study;
  int completed = 0;
  int failed = 0;
  std::optional<PrmMap> pending;
};

nlohmann::json progress_to_json(const StudyRun& run, const Progress& p) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["config"] = format_config(run.config);
  j["seed"] = run.seed;
  j["max_epochs"] = run.max_epochs;
  j["study"] = study_to_json(p.study);
  j["completed"] = p.completed;
  j["failed"] = p.failed;
  j["pending"] = p.pending ? prm_to_json(*p.pending) : nlohmann::json(nullptr);
  return j;
}

void save(const StudyRun& run, const Progress& p) {
  if (run.checkpoint.empty()) return;
  auto tmp = run.checkpoint;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out << progress_to_json(run, p).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, run.checkpoint, ec);
  if (ec) throw IoError("cannot replace checkpoint " + run.checkpoint.string() + ": " + ec.message());
}

std::optional<Progress> load(const StudyRun& run, const SearchSpace& space) {
  if (run.checkpoint.empty() || !std::filesystem::exists(run.checkpoint)) return std::nullopt;
  std::ifstream in(run.checkpoint);
  const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  const std::string where = "checkpoint " + run.checkpoint.string();
  if (j.is_discarded() || !j.is_object()) throw MalformedDocument(where + " is not valid JSON");
  try {
    if (j.at("version") != kCheckpointVersion) throw MalformedDocument(where + " has an unknown version");
    if (j.at("config") != format_config(run.config) || j.at("seed") != run.seed ||
        j.at("max_epochs") != run.max_epochs) {
      throw MalformedDocument(where + " belongs to a different study; start fresh to discard it");
    }
    Progress p;
    p.study = study_from_json(j.at("study"));
    if (space_to_json(p.study.space) != space_to_json(space)) {
      throw MalformedDocument(where + " was written for a different search space; start fresh to discard it");
    }
    p.completed = j.at("completed").get<int>();
    p.failed = j.at("failed").get<int>();
    if (!j.at("pending").is_null()) p.pending = prm_from_json(j.at("pending"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocument(where + ": " + e.what());
  }
}

void require_epoch_event(const nlohmann::json& ev, int expected, int max_epochs) {
  const auto bad = [&](const std::string& why) { throw ProtocolError("bad epoch event (" + why + "): " + ev.dump()); };
  if (!ev.contains("epoch") || !ev["epoch"].is_number_integer()) bad("epoch must be an integer");
  if (!ev.contains("accuracy") || !ev["accuracy"].is_number()) bad("accuracy must be a number");
  if (!ev.contains("duration_ns") || !ev["duration_ns"].is_number_integer()) bad("duration_ns must be an integer");
  const int epoch = ev["epoch"].get<int>();
  if (epoch != expected) bad("expected epoch " + std::to_string(expected));
  if (epoch > max_epochs) bad("epoch beyond max_epochs");
  const double acc = ev["accuracy"].get<double>();
  if (!std::isfinite(acc) || acc < 0.0 || acc > 1.0) bad("accuracy outside [0,1]");
  if (ev["duration_ns"].get<std::int64_t>() <= 0) bad("duration_ns must be positive");
}

std::string nn_code_text(const StudyRun& run) {
  std::string cmd;
  for (const std::string& part : run.plugin.command) {
    if (!cmd.empty()) cmd += ' ';
    cmd += part;
  }
  return "nn: " + run.config.nn + "\nplugin: " + cmd + "\n";
}

struct Connection {
  std::optional<PluginSession> session;
  std::set<std::string> supported;

  void open(const PluginDescriptor& p) {
    session.reset();
    session.emplace(PluginSession::launch(p));
    supported = handshake(*session);
  }
};

}  // namespace

void validate(const StudyRun& run) {
  if (run.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (run.max_epochs < 1 || run.max_epochs > kMaxEpochs) throw std::invalid_argument("max_epochs must lie in [1,50]");
  if (run.registry == nullptr) throw std::invalid_argument("study has no registry");
  auto it = run.space.find("transform");
  if (it == run.space.end() || !std::holds_alternative<Categorical>(it->second)) {
    throw std::invalid_argument("search space needs a categorical 'transform'");
  }
  lemur::validate(run.space);
  validate(run.plugin);
}

std::pair<PrmMap, std::string> split_transform(PrmMap prm) {
  auto it = prm.find("transform");
  if (it == prm.end()) throw BadHyperparameter("prm lacks 'transform'");
  const auto* name = std::get_if<std::string>(&it->second);
  if (name == nullptr) throw BadHyperparameter("transform must be a name");
  std::string transform = *name;
  prm.erase(it);
  return {std::move(prm), std::move(transform)};
}

TrialDocument run_trial(const StudyRun& run, PluginSession& session, const PrmMap& prm,
                        const std::string& transform) {
  run.registry->ensure_code(CodeKind::nn, run.config.nn, nn_code_text(run));
  run.registry->ensure_code(CodeKind::metric, run.config.metric, builtin_metric_code(run.config.metric));
  TrialDocument doc;
  doc.config = run.config;
  doc.transform = transform;
  doc.prm = prm;

  PrmMap sent = prm;
  sent["transform"] = transform;
  const nlohmann::json cmd = {{"cmd", "train"},
                              {"config",
                               {{"task", run.config.task},
                                {"dataset", run.config.dataset},
                                {"metric", run.config.metric},
                                {"nn", run.config.nn}}},
                              {"prm", prm_to_json(sent)},
                              {"max_epochs", run.max_epochs},
                              {"in_shape", run.plugin.in_shape},
                              {"out_shape", run.plugin.out_shape},
                              {"device", run.plugin.device}};

  auto persist = [&] {
    if (!doc.epochs.empty()) run.registry->ingest_trial(doc, OnConflict::overwrite);
  };
  try {
    session.send(cmd);
    while (true) {
      const nlohmann::json ev = session.receive(run.plugin.epoch_timeout);
      const std::string kind = ev["event"].get<std::string>();
      if (kind == "epoch") {
        const int expected = static_cast<int>(doc.epochs.size()) + 1;
        require_epoch_event(ev, expected, run.max_epochs);
        doc.epochs.push_back(
            EpochResult{expected, ev["accuracy"].get<double>(), ev["duration_ns"].get<std::int64_t>()});
      } else if (kind == "done") {
        if (doc.epochs.empty()) throw ProtocolError("plugin finished a trial without epochs");
        break;
      } else if (kind == "error") {
        const std::string message = ev.value("message", std::string("unspecified plugin error"));
        throw TrialFailed("plugin error after " + std::to_string(doc.epochs.size()) + " epochs: " + message);
      } else {
        throw ProtocolError("unexpected event during training: " + ev.dump());
      }
    }
  } catch (const Error&) {
    persist();
    throw;
  }
  persist();
  return doc;
}

nlohmann::json summary_to_json(const StudySummary& s) {
  return {{"completed", s.completed},
          {"failed", s.failed},
          {"best_prm", prm_to_json(s.best_prm)},
          {"best_accuracy", s.best_accuracy ? nlohmann::json(*s.best_accuracy) : nlohmann::json(nullptr)}};
}

std::filesystem::path default_checkpoint_path(const std::filesystem::path& db, const ConfigId& config,
                                              std::uint64_t seed) {
  auto name = db.filename().string() + "." + format_config(config) + ".s" + std::to_string(seed) + ".ckpt.json";
  return db.parent_path() / name;
}

StudySummary run_study(const StudyRun& run, const TrialObserver& on_trial) {
  validate(run);
  Registry& reg = *run.registry;

  for (const std::string& t : std::get<Categorical>(run.space.at("transform")).choices) {
    if (!reg.find_code(CodeKind::transform, t)) throw UnknownCode("transform '" + t + "' is not registered");
  }
  Connection conn;
  conn.open(run.plugin);
  const SearchSpace space = restrict_space(run.space, conn.supported);

  Progress p;
  if (auto loaded = load(run, space)) {
    p = std::move(*loaded);
  } else {
    p.study.space = space;
    p.study.seed = run.seed;
    p.study.settings = run.tpe;
  }

  while (p.completed + p.failed < run.trials) {
    const bool resumed = p.pending.has_value();
    if (!resumed) {
      p.pending = ask(p.study);
      save(run, p);
    }
    const PrmMap full = *p.pending;
    auto [prm, transform] = split_transform(full);

    std::optional<TrialDocument> doc;
    if (resumed) {
      auto stored = reg.trial_epochs(run.config, transform, prm_hash(prm));
      if (static_cast<int>(stored.size()) == run.max_epochs) {
        doc = TrialDocument{run.config, transform, prm, std::move(stored), {}};
      }
    }
    bool failed = false;
    TrialDocument attempted{run.config, transform, prm, {}, {}};
    if (!doc) {
      try {
        doc = run_trial(run, *conn.session, prm, transform);
      } catch (const TrialFailed&) {
        failed = true;
      } catch (const Timeout&) {
        failed = true;
      }
      if (failed) {
        attempted.epochs = reg.trial_epochs(run.config, transform, prm_hash(prm));
        // Start the next trial on a fresh process.
        conn.open(run.plugin);
      }
    }
    if (failed) {
      ++p.failed;
    } else {
      observe(p.study, full, doc->epochs.back().accuracy);
      ++p.completed;
    }
    p.pending.reset();
    save(run, p);
    if (on_trial) on_trial(p.completed + p.failed, failed ? attempted : *doc, failed);
  }

  StudySummary summary;
  summary.completed = p.completed;
  summary.failed = p.failed;
  // Failed trials keep their partial epochs in the store but never win.
  std::map<std::string, std::string> transform_by_id;
  std::set<std::pair<std::string, std::string>> keys;
  for (const Observation& o : p.study.history) {
    const auto [prm, transform] = split_transform(o.prm);
    if (auto code = reg.find_code(CodeKind::transform, transform)) {
      transform_by_id[code->id] = transform;
      keys.emplace(prm_hash(prm), code->id);
    }
  }
  QueryFilter filter{run.config.task, run.config.dataset, run.config.metric, run.config.nn, false};
  std::vector<KeyedRow> rows;
  for (KeyedRow& r : reg.query_keyed(filter)) {
    if (keys.count({r.prm_hash, r.transform_id})) rows.push_back(std::move(r));
  }
  // select_best drops the hidden keys, so find the winning keyed row again.
  const auto best = select_best(rows);
  if (!best.empty()) {
    const ResultRow& b = best.front();
    summary.best_accuracy = b.accuracy;
    for (const KeyedRow& r : rows) {
      if (r.row == b) {
        summary.best_prm = r.row.prm;
        summary.best_prm["transform"] = transform_by_id.at(r.transform_id);
        break;
      }
    }
  }
  return summary;
}

}  // namespace lemur::harness
