#include "lemur/registry.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <tuple>
#include <utility>

#include "lemur/error.hpp"
#include "lemur/hash.hpp"

namespace lemur {
namespace {

constexpr int kSchemaVersion = 1;

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS nn (
  id   TEXT PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  code TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS metric (
  id   TEXT PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  code TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS transform (
  id   TEXT PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  code TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS prm (
  uid     TEXT PRIMARY KEY,
  entries TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS stat (
  task         TEXT NOT NULL,
  dataset      TEXT NOT NULL,
  metric_id    TEXT NOT NULL REFERENCES metric(id),
  nn_id        TEXT NOT NULL REFERENCES nn(id),
  transform_id TEXT NOT NULL REFERENCES transform(id),
  prm_hash     TEXT NOT NULL,
  prm_id       TEXT NOT NULL REFERENCES prm(uid),
  epoch        INTEGER NOT NULL CHECK (epoch >= 1),
  accuracy     REAL NOT NULL CHECK (accuracy >= 0.0 AND accuracy <= 1.0),
  duration_ns  INTEGER NOT NULL CHECK (duration_ns >= 0),
  PRIMARY KEY (task, dataset, metric_id, nn_id, transform_id, prm_hash, epoch)
);
CREATE INDEX IF NOT EXISTS stat_by_config ON stat (task, dataset, metric_id, nn_id);
)sql";

const std::map<std::string, std::vector<std::string>>& expected_columns() {
  static const std::map<std::string, std::vector<std::string>> cols = {
      {"nn", {"id", "name", "code"}},
      {"metric", {"id", "name", "code"}},
      {"transform", {"id", "name", "code"}},
      {"prm", {"uid", "entries"}},
      {"stat",
       {"task", "dataset", "metric_id", "nn_id", "transform_id", "prm_hash", "prm_id", "epoch",
        "accuracy", "duration_ns"}},
  };
  return cols;
}

bool is_corruption(int rc) {
  int primary = rc & 0xff;
  return primary == SQLITE_CORRUPT || primary == SQLITE_NOTADB;
}

[[noreturn]] void throw_sqlite(sqlite3* db, int rc, const std::string& what) {
  std::string msg = what + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
  if (is_corruption(rc)) throw CorruptStore(msg);
  int primary = rc & 0xff;
  if (primary == SQLITE_CONSTRAINT && (rc == SQLITE_CONSTRAINT_FOREIGNKEY)) {
    throw ReferencedEntity(msg);
  }
  if (primary == SQLITE_IOERR || primary == SQLITE_CANTOPEN || primary == SQLITE_READONLY ||
      primary == SQLITE_FULL || primary == SQLITE_PERM) {
    throw IoError(msg);
  }
  throw Error(msg);
}

// Prepared statement with positional binding.
class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    int rc = sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr);
    if (rc != SQLITE_OK) throw_sqlite(db, rc, "prepare");
  }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;
  ~Stmt() { sqlite3_finalize(stmt_); }

  Stmt& bind(int i, std::string_view s) {
    check(sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::string>& s) {
    if (s) return bind(i, std::string_view(*s));
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt& bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }

  // True while a row is available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw_sqlite(db_, sqlite3_extended_errcode(db_), "step");
  }
  void run() {
    while (step()) {
    }
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::string text(int col) const {
    const unsigned char* p = sqlite3_column_text(stmt_, col);
    int n = sqlite3_column_bytes(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(n)) : std::string();
  }
  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw_sqlite(db_, rc, "bind");
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  int rc = sqlite3_exec(db, sql, nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errstr(rc);
    sqlite3_free(err);
    if (is_corruption(rc)) throw CorruptStore(msg);
    throw_sqlite(db, sqlite3_extended_errcode(db), std::string("exec: ") + msg);
  }
}

// Rolls back unless committed.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

const char* table_of(CodeKind kind) {
  switch (kind) {
    case CodeKind::nn:
      return "nn";
    case CodeKind::metric:
      return "metric";
    case CodeKind::transform:
      return "transform";
  }
  return "nn";
}

}  // namespace

std::string_view to_string(CodeKind kind) { return table_of(kind); }

CodeKind code_kind_from(std::string_view s) {
  if (s == "nn") return CodeKind::nn;
  if (s == "metric") return CodeKind::metric;
  if (s == "transform") return CodeKind::transform;
  throw MalformedDocument("unknown code kind '" + std::string(s) + "'");
}

std::string builtin_metric_code(std::string_view name) {
  if (name == "acc") {
    return "metric: acc\n"
           "accuracy = count(prediction == target) / count(target)\n";
  }
  if (name == "iou") {
    return "metric: iou\n"
           "mean over classes with union > 0 of intersection / union,\n"
           "accumulated over every mask in the evaluation set\n";
  }
  if (name == "map") {
    return "metric: map\n"
           "mean over classes with ground truth of all-point interpolated\n"
           "average precision, greedy matching at IoU >= 0.5\n";
  }
  return "metric: " + std::string(name) + "\n";
}

void validate(const TrialDocument& doc) {
  const ConfigId& c = doc.config;
  if (!is_field_token(c.task) || !is_field_token(c.dataset) || !is_field_token(c.metric) ||
      !is_name_token(c.nn)) {
    throw MalformedDocument("invalid config '" + format_config(c) + "'");
  }
  if (!is_name_token(doc.transform)) {
    throw MalformedDocument("invalid transform name '" + doc.transform + "'");
  }
  validate_prm(doc.prm);
  if (doc.epochs.empty()) throw MalformedDocument("trial has no epochs");
  int expected_min = 1;
  for (const EpochResult& e : doc.epochs) {
    if (e.epoch < expected_min) {
      throw MalformedDocument("epoch numbers must start at 1 and increase strictly");
    }
    if (!std::isfinite(e.accuracy) || e.accuracy < 0.0 || e.accuracy > 1.0) {
      throw MalformedDocument("accuracy outside [0,1] at epoch " + std::to_string(e.epoch));
    }
    if (e.duration_ns < 0) {
      throw MalformedDocument("negative duration at epoch " + std::to_string(e.epoch));
    }
    expected_min = e.epoch + 1;
  }
  if (doc.epochs.front().epoch != 1) throw MalformedDocument("first epoch must be 1");
}

nlohmann::json trial_to_json(const TrialDocument& doc) {
  nlohmann::json j;
  j["config"] = {{"task", doc.config.task},
                 {"dataset", doc.config.dataset},
                 {"metric", doc.config.metric},
                 {"nn", doc.config.nn}};
  j["transform"] = doc.transform;
  j["prm"] = prm_to_json(doc.prm);
  j["epochs"] = nlohmann::json::array();
  for (const EpochResult& e : doc.epochs) {
    j["epochs"].push_back({{"epoch", e.epoch}, {"accuracy", e.accuracy}, {"duration_ns", e.duration_ns}});
  }
  if (!doc.codes.empty()) {
    nlohmann::json codes = nlohmann::json::object();
    for (const auto& [kind, text] : doc.codes) codes[std::string(to_string(kind))] = text;
    j["codes"] = codes;
  }
  return j;
}

TrialDocument trial_from_json(const nlohmann::json& j) {
  TrialDocument doc;
  if (!j.is_object()) throw MalformedDocument("trial document must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "config" && key != "transform" && key != "prm" && key != "epochs" && key != "codes") {
      throw MalformedDocument("trial document has unexpected key '" + key + "'");
    }
  }
  try {
    const auto& c = j.at("config");
    if (!c.is_object()) throw MalformedDocument("config must be an object with task, dataset, metric and nn");
    doc.config = ConfigId{c.at("task").get<std::string>(), c.at("dataset").get<std::string>(),
                          c.at("metric").get<std::string>(), c.at("nn").get<std::string>()};
    doc.transform = j.at("transform").get<std::string>();
    doc.prm = prm_from_json(j.at("prm"));
    for (const auto& e : j.at("epochs")) {
      doc.epochs.push_back(EpochResult{e.at("epoch").get<int>(), e.at("accuracy").get<double>(),
                                       e.at("duration_ns").get<std::int64_t>()});
    }
    if (j.contains("codes")) {
      for (const auto& [kind, text] : j.at("codes").items()) {
        doc.codes[code_kind_from(kind)] = text.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocument(std::string("trial document: ") + e.what());
  }
  validate(doc);
  return doc;
}

std::vector<ResultRow> select_best(std::vector<KeyedRow> rows) {
  auto group = [](const KeyedRow& k) {
    return std::tie(k.row.task, k.row.dataset, k.row.metric, k.row.nn);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const KeyedRow& a, const KeyedRow& b) {
    if (group(a) != group(b)) return group(a) < group(b);
    if (a.row.accuracy != b.row.accuracy) return a.row.accuracy > b.row.accuracy;
    if (a.row.epoch != b.row.epoch) return a.row.epoch < b.row.epoch;
    if (a.prm_hash != b.prm_hash) return a.prm_hash < b.prm_hash;
    return a.transform_id < b.transform_id;
  });
  std::vector<ResultRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 || group(rows[i]) != group(rows[i - 1])) out.push_back(rows[i].row);
  }
  return out;
}

struct Registry::Impl {
  std::filesystem::path path;
  sqlite3* db = nullptr;
  mutable std::mutex write_mutex;

  ~Impl() {
    if (db) sqlite3_close_v2(db);
  }

  std::optional<CodeEntity> code_by(CodeKind kind, const char* column, std::string_view value) const {
    std::string sql = std::string("SELECT id, name, code FROM ") + table_of(kind) + " WHERE " + column + " = ?1";
    Stmt s(db, sql.c_str());
    s.bind(1, value);
    if (!s.step()) return std::nullopt;
    return CodeEntity{kind, s.text(1), s.text(2), s.text(0)};
  }

  CodeEntity upsert(CodeKind kind, std::string_view name, std::string_view code_text) {
    std::string normalized = normalize_code(code_text);
    std::string id = sha256_hex(normalized);
    if (auto existing = code_by(kind, "id", id)) return *existing;
    std::string final_name =
        name.empty() ? std::string(to_string(kind)) + "-" + id.substr(0, 8) : std::string(name);
    if (!is_name_token(final_name)) {
      throw MalformedDocument("invalid " + std::string(to_string(kind)) + " name '" + final_name + "'");
    }
    if (auto taken = code_by(kind, "name", final_name)) {
      throw NameCollision(std::string(to_string(kind)) + " '" + final_name +
                          "' is already registered with different code (id " + taken->id.substr(0, 12) + ")");
    }
    std::string sql = std::string("INSERT INTO ") + table_of(kind) + " (id, name, code) VALUES (?1, ?2, ?3)";
    Stmt s(db, sql.c_str());
    s.bind(1, std::string_view(id)).bind(2, std::string_view(final_name)).bind(3, std::string_view(normalized));
    s.run();
    return CodeEntity{kind, final_name, normalized, id};
  }

  CodeEntity ensure(CodeKind kind, std::string_view name, std::string_view code_text) {
    if (auto existing = code_by(kind, "name", name)) return *existing;
    return upsert(kind, name, code_text);
  }

  struct RowKey {
    std::string task, dataset, metric_id, nn_id, transform_id, prm_hash, prm_id;
  };

  IngestReport write_rows(const RowKey& key, const std::string& prm_entries,
                          const std::vector<EpochResult>& epochs, OnConflict on_conflict) {
    {
      Stmt p(db, "INSERT OR IGNORE INTO prm (uid, entries) VALUES (?1, ?2)");
      p.bind(1, std::string_view(key.prm_id)).bind(2, std::string_view(prm_entries));
      p.run();
    }
    Stmt find(db,
              "SELECT accuracy, duration_ns FROM stat WHERE task = ?1 AND dataset = ?2 AND metric_id = ?3 "
              "AND nn_id = ?4 AND transform_id = ?5 AND prm_hash = ?6 AND epoch = ?7");
    Stmt insert(db,
                "INSERT INTO stat (task, dataset, metric_id, nn_id, transform_id, prm_hash, prm_id, epoch, "
                "accuracy, duration_ns) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)");
    Stmt update(db,
                "UPDATE stat SET accuracy = ?8, duration_ns = ?9, prm_id = ?10 WHERE task = ?1 AND dataset = ?2 "
                "AND metric_id = ?3 AND nn_id = ?4 AND transform_id = ?5 AND prm_hash = ?6 AND epoch = ?7");
    auto bind_key = [&](Stmt& s, int epoch) {
      s.bind(1, std::string_view(key.task))
          .bind(2, std::string_view(key.dataset))
          .bind(3, std::string_view(key.metric_id))
          .bind(4, std::string_view(key.nn_id))
          .bind(5, std::string_view(key.transform_id))
          .bind(6, std::string_view(key.prm_hash))
          .bind(7, static_cast<std::int64_t>(epoch));
    };
    IngestReport report;
    for (const EpochResult& e : epochs) {
      find.reset();
      bind_key(find, e.epoch);
      if (!find.step()) {
        insert.reset();
        bind_key(insert, e.epoch);
        insert.bind(7, std::string_view(key.prm_id))
            .bind(8, static_cast<std::int64_t>(e.epoch))
            .bind(9, e.accuracy)
            .bind(10, e.duration_ns);
        insert.run();
        ++report.inserted;
        continue;
      }
      double acc = find.real(0);
      std::int64_t dur = find.int64(1);
      if (acc == e.accuracy && dur == e.duration_ns) {
        ++report.duplicates;
        continue;
      }
      ++report.conflicts;
      if (on_conflict == OnConflict::reject) {
        throw ConflictError("epoch " + std::to_string(e.epoch) + " of trial " + key.prm_hash.substr(0, 12) +
                            " already stored with different values");
      }
      update.reset();
      bind_key(update, e.epoch);
      update.bind(8, e.accuracy).bind(9, e.duration_ns).bind(10, std::string_view(key.prm_id));
      update.run();
    }
    return report;
  }

  void check_schema() {
    Stmt v(db, "PRAGMA user_version");
    int version = v.step() ? static_cast<int>(v.int64(0)) : 0;
    if (version != 0 && version != kSchemaVersion) {
      throw CorruptStore("unsupported schema version " + std::to_string(version));
    }
    for (const auto& [table, cols] : expected_columns()) {
      std::string sql = "PRAGMA table_info(" + table + ")";
      Stmt info(db, sql.c_str());
      std::vector<std::string> found;
      while (info.step()) found.push_back(info.text(1));
      if (!found.empty() && found != cols) {
        throw CorruptStore("table '" + table + "' does not match the expected schema");
      }
    }
  }
};

Registry::Registry(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Registry::Registry(Registry&&) noexcept = default;
Registry& Registry::operator=(Registry&&) noexcept = default;
Registry::~Registry() = default;

Registry Registry::open(const std::filesystem::path& path) {
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) impl->path = path / "lemur.db";
  int rc = sqlite3_open_v2(impl->path.c_str(), &impl->db,
                           SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = "cannot open '" + impl->path.string() + "': " + sqlite3_errstr(rc);
    throw IoError(msg);
  }
  sqlite3_busy_timeout(impl->db, 10000);
  exec(impl->db, "PRAGMA foreign_keys = ON");
  {
    Stmt check(impl->db, "PRAGMA quick_check");
    std::string verdict = check.step() ? check.text(0) : "ok";
    if (verdict != "ok") throw CorruptStore("'" + impl->path.string() + "' failed integrity check: " + verdict);
  }
  impl->check_schema();
  exec(impl->db, "PRAGMA journal_mode = WAL");
  {
    Transaction tx(impl->db);
    exec(impl->db, kSchema);
    exec(impl->db, ("PRAGMA user_version = " + std::to_string(kSchemaVersion)).c_str());
    tx.commit();
  }
  return Registry(std::move(impl));
}

const std::filesystem::path& Registry::path() const { return impl_->path; }

CodeEntity Registry::upsert_code(CodeKind kind, std::string_view name, std::string_view code_text) {
  std::lock_guard lock(impl_->write_mutex);
  return impl_->upsert(kind, name, code_text);
}

std::optional<CodeEntity> Registry::find_code(CodeKind kind, std::string_view name) const {
  return impl_->code_by(kind, "name", name);
}

std::vector<CodeEntity> Registry::list_codes(CodeKind kind) const {
  std::string sql = std::string("SELECT id, name, code FROM ") + table_of(kind) + " ORDER BY name";
  Stmt s(impl_->db, sql.c_str());
  std::vector<CodeEntity> out;
  while (s.step()) out.push_back(CodeEntity{kind, s.text(1), s.text(2), s.text(0)});
  return out;
}

CodeEntity Registry::ensure_code(CodeKind kind, std::string_view name, std::string_view code_text) {
  std::lock_guard lock(impl_->write_mutex);
  return impl_->ensure(kind, name, code_text);
}

void Registry::delete_code(CodeKind kind, std::string_view name) {
  std::lock_guard lock(impl_->write_mutex);
  std::string sql = std::string("DELETE FROM ") + table_of(kind) + " WHERE name = ?1";
  Stmt s(impl_->db, sql.c_str());
  s.bind(1, name);
  s.run();
}

IngestReport Registry::ingest_trial(const TrialDocument& doc, OnConflict on_conflict) {
  validate(doc);
  std::lock_guard lock(impl_->write_mutex);
  Transaction tx(impl_->db);
  auto resolve = [&](CodeKind kind, const std::string& name) {
    if (auto it = doc.codes.find(kind); it != doc.codes.end()) {
      return impl_->upsert(kind, name, it->second).id;
    }
    auto found = impl_->code_by(kind, "name", name);
    if (!found) {
      throw UnknownCode(std::string(to_string(kind)) + " '" + name + "' is not registered and no code was provided");
    }
    return found->id;
  };
  Impl::RowKey key;
  key.task = doc.config.task;
  key.dataset = doc.config.dataset;
  key.metric_id = resolve(CodeKind::metric, doc.config.metric);
  key.nn_id = resolve(CodeKind::nn, doc.config.nn);
  key.transform_id = resolve(CodeKind::transform, doc.transform);
  key.prm_hash = prm_hash(doc.prm);
  key.prm_id = key.prm_hash;
  IngestReport report = impl_->write_rows(key, canonical_json(doc.prm), doc.epochs, on_conflict);
  tx.commit();
  return report;
}

IngestReport Registry::load_fixture(const std::filesystem::path& fixture) {
  nlohmann::json j;
  {
    std::ifstream in(fixture);
    if (!in) throw MalformedFixture("cannot read fixture '" + fixture.string() + "'");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw MalformedFixture("fixture '" + fixture.string() + "': " + e.what());
    }
  }
  if (!j.is_array()) throw MalformedFixture("fixture must be a JSON array");

  std::lock_guard lock(impl_->write_mutex);
  Transaction tx(impl_->db);
  IngestReport report;
  std::string transform_id =
      impl_->ensure(CodeKind::transform, kFixtureTransform, "transform: paper-ref\nreference table entry, no preprocessing recorded\n").id;
  std::size_t index = 0;
  for (const auto& entry : j) {
    ++index;
    auto bad = [&](const std::string& what) {
      return MalformedFixture("fixture entry " + std::to_string(index) + ": " + what);
    };
    if (!entry.is_object()) throw bad("not an object");
    std::string task, dataset, metric, nn, resolution;
    double value = 0.0, params = 0.0;
    try {
      task = entry.at("task").get<std::string>();
      dataset = entry.at("dataset").get<std::string>();
      metric = entry.at("metric").get<std::string>();
      nn = entry.at("nn").get<std::string>();
      value = entry.at("value").get<double>();
      params = entry.at("params_millions").get<double>();
      resolution = entry.at("resolution").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw bad(e.what());
    }
    if (!is_field_token(task) || !is_field_token(dataset) || !is_field_token(metric) || !is_name_token(nn)) {
      throw bad("invalid config fields");
    }
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) throw bad("value outside [0,1]");
    if (!std::isfinite(params) || params < 0.0) throw bad("params_millions must be non-negative");
    if (!is_prm_token(resolution)) throw bad("invalid resolution '" + resolution + "'");

    PrmMap prm{{"params_millions", params}, {"resolution", resolution}};
    Impl::RowKey key;
    key.task = task;
    key.dataset = dataset;
    key.metric_id = impl_->ensure(CodeKind::metric, metric, builtin_metric_code(metric)).id;
    key.nn_id = impl_->ensure(CodeKind::nn, nn, "nn: " + nn + "\nreference table entry, implementation not bundled\n").id;
    key.transform_id = transform_id;
    key.prm_hash = std::string(kFixturePrmHash);
    key.prm_id = prm_hash(prm);
    report += impl_->write_rows(key, canonical_json(prm), {EpochResult{1, value, 0}}, OnConflict::reject);
  }
  tx.commit();
  return report;
}

std::vector<KeyedRow> Registry::query_keyed(const QueryFilter& filter) const {
  Stmt s(impl_->db,
         "SELECT s.task, s.dataset, m.name, m.code, n.name, n.code, s.epoch, s.accuracy, s.duration_ns, "
         "p.entries, t.code, s.prm_hash, s.transform_id "
         "FROM stat s JOIN metric m ON m.id = s.metric_id JOIN nn n ON n.id = s.nn_id "
         "JOIN transform t ON t.id = s.transform_id JOIN prm p ON p.uid = s.prm_id "
         "WHERE (?1 IS NULL OR s.task = ?1) AND (?2 IS NULL OR s.dataset = ?2) "
         "AND (?3 IS NULL OR m.name = ?3) AND (?4 IS NULL OR n.name = ?4) "
         "ORDER BY s.task, s.dataset, m.name, n.name, s.prm_hash, s.transform_id, s.epoch");
  s.bind(1, filter.task).bind(2, filter.dataset).bind(3, filter.metric).bind(4, filter.nn);
  std::vector<KeyedRow> out;
  while (s.step()) {
    KeyedRow k;
    k.row.task = s.text(0);
    k.row.dataset = s.text(1);
    k.row.metric = s.text(2);
    k.row.metric_code = s.text(3);
    k.row.nn = s.text(4);
    k.row.nn_code = s.text(5);
    k.row.epoch = static_cast<int>(s.int64(6));
    k.row.accuracy = s.real(7);
    k.row.duration = s.int64(8);
    k.row.prm = prm_from_json(nlohmann::json::parse(s.text(9)));
    k.row.transform_code = s.text(10);
    k.prm_hash = s.text(11);
    k.transform_id = s.text(12);
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<ResultRow> Registry::query_data(const QueryFilter& filter) const {
  std::vector<KeyedRow> keyed = query_keyed(filter);
  if (filter.only_best_accuracy) return select_best(std::move(keyed));
  std::vector<ResultRow> out;
  out.reserve(keyed.size());
  for (KeyedRow& k : keyed) out.push_back(std::move(k.row));
  return out;
}

std::vector<EpochResult> Registry::trial_epochs(const ConfigId& config, std::string_view transform,
                                                std::string_view hash) const {
  Stmt s(impl_->db,
         "SELECT s.epoch, s.accuracy, s.duration_ns FROM stat s JOIN metric m ON m.id = s.metric_id "
         "JOIN nn n ON n.id = s.nn_id JOIN transform t ON t.id = s.transform_id "
         "WHERE s.task = ?1 AND s.dataset = ?2 AND m.name = ?3 AND n.name = ?4 AND t.name = ?5 "
         "AND s.prm_hash = ?6 ORDER BY s.epoch");
  s.bind(1, std::string_view(config.task))
      .bind(2, std::string_view(config.dataset))
      .bind(3, std::string_view(config.metric))
      .bind(4, std::string_view(config.nn))
      .bind(5, transform)
      .bind(6, hash);
  std::vector<EpochResult> out;
  while (s.step()) out.push_back(EpochResult{static_cast<int>(s.int64(0)), s.real(1), s.int64(2)});
  return out;
}

std::int64_t Registry::stat_count() const {
  Stmt s(impl_->db, "SELECT COUNT(*) FROM stat");
  s.step();
  return s.int64(0);
}

}  // namespace lemur
