#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lemur/config.hpp"
#include "lemur/prm.hpp"

namespace lemur {

enum class CodeKind { nn, metric, transform };

std::string_view to_string(CodeKind kind);
// Throws MalformedDocument for anything but "nn", "metric" or "transform".
CodeKind code_kind_from(std::string_view s);

// A stored source artifact. `id` is the SHA-256 of the normalized code.
struct CodeEntity {
  CodeKind kind;
  std::string name;
  std::string code_text;
  std::string id;
};

struct EpochResult {
  int epoch = 0;
  double accuracy = 0.0;
  std::int64_t duration_ns = 0;

  friend bool operator==(const EpochResult&, const EpochResult&) = default;
};

// One optimization trial as exchanged in JSON before it lands in the store.
struct TrialDocument {
  ConfigId config;
  std::string transform;
  PrmMap prm;
  std::vector<EpochResult> epochs;
  std::map<CodeKind, std::string> codes;
};

// Throws MalformedDocument.
void validate(const TrialDocument& doc);
nlohmann::json trial_to_json(const TrialDocument& doc);
TrialDocument trial_from_json(const nlohmann::json& j);

// Column order of query results.
inline constexpr std::array<std::string_view, 11> kResultColumns = {
    "task", "dataset", "metric", "metric_code", "nn", "nn_code",
    "epoch", "accuracy", "duration", "prm", "transform_code"};

struct ResultRow {
  std::string task;
  std::string dataset;
  std::string metric;
  std::string metric_code;
  std::string nn;
  std::string nn_code;
  int epoch = 0;
  double accuracy = 0.0;
  std::int64_t duration = 0;
  PrmMap prm;
  std::string transform_code;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// A result row plus the hidden key parts used for best-row tie breaking.
struct KeyedRow {
  ResultRow row;
  std::string prm_hash;
  std::string transform_id;
};

// One row per (task, dataset, metric, nn): maximal accuracy, ties broken by
// lowest epoch, then lowest prm_hash, then lowest transform id. Output is
// ordered by the group key.
std::vector<ResultRow> select_best(std::vector<KeyedRow> rows);

struct IngestReport {
  int inserted = 0;
  int duplicates = 0;
  int conflicts = 0;

  IngestReport& operator+=(const IngestReport& o) {
    inserted += o.inserted;
    duplicates += o.duplicates;
    conflicts += o.conflicts;
    return *this;
  }
};

enum class OnConflict { reject, overwrite };

struct QueryFilter {
  std::optional<std::string> task;
  std::optional<std::string> dataset;
  std::optional<std::string> metric;
  std::optional<std::string> nn;
  bool only_best_accuracy = false;
};

// prm_hash carried by rows loaded from the reference tables.
inline constexpr std::string_view kFixturePrmHash = "paper-fixture";
inline constexpr std::string_view kFixtureTransform = "paper-ref";

// Code text registered for a metric name that has no code of its own yet.
std::string builtin_metric_code(std::string_view name);

// Single-file SQLite store of trials, code artifacts and hyperparameters.
//
// A handle may move between threads. Writes must come from one thread at a
// time; other handles on the same file may read concurrently.
class Registry {
 public:
  // Creates the schema when absent. A directory path stores into
  // `<dir>/lemur.db`. Throws CorruptStore or IoError.
  static Registry open(const std::filesystem::path& path);

  Registry(Registry&&) noexcept;
  Registry& operator=(Registry&&) noexcept;
  ~Registry();

  const std::filesystem::path& path() const;

  // Content-addressed insert. Identical code returns the stored entity; an
  // empty name becomes `<kind>-<first 8 hex of id>`. Throws NameCollision
  // when the name is taken by different code.
  CodeEntity upsert_code(CodeKind kind, std::string_view name, std::string_view code_text);
  std::optional<CodeEntity> find_code(CodeKind kind, std::string_view name) const;
  std::vector<CodeEntity> list_codes(CodeKind kind) const;
  // Returns the entity registered under `name`, registering `code_text`
  // under that name when there is none.
  CodeEntity ensure_code(CodeKind kind, std::string_view name, std::string_view code_text);
  // Throws ReferencedEntity while stat rows still point at the entity.
  void delete_code(CodeKind kind, std::string_view name);

  // Writes one row per epoch inside a single transaction. Throws
  // UnknownCode or ConflictError (reject mode, nothing written).
  IngestReport ingest_trial(const TrialDocument& doc, OnConflict on_conflict = OnConflict::reject);
  // Throws MalformedFixture; nothing is written on failure.
  IngestReport load_fixture(const std::filesystem::path& fixture);

  std::vector<ResultRow> query_data(const QueryFilter& filter) const;
  std::vector<KeyedRow> query_keyed(const QueryFilter& filter) const;

  // Stored epochs for one trial key, ascending.
  std::vector<EpochResult> trial_epochs(const ConfigId& config, std::string_view transform,
                                        std::string_view prm_hash) const;
  std::int64_t stat_count() const;

 private:
  struct Impl;
  explicit Registry(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace lemur
