#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemur/config.hpp"
#include "lemur/registry.hpp"
#include "lemur/space.hpp"
#include "lemur/tpe.hpp"

namespace lemur::harness {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultEpochTimeout{300'000};

struct PluginDescriptor {
  std::vector<std::string> command;
  std::string nn_name;
  std::vector<int> in_shape{2};
  std::vector<int> out_shape{3};
  std::string device = "cpu";
  // Longest wait for any single plugin line.
  std::chrono::milliseconds epoch_timeout = kDefaultEpochTimeout;
};

// Throws std::invalid_argument.
void validate(const PluginDescriptor& p);

// A running plugin process speaking the line protocol over its stdio. The
// process is killed when the session is destroyed.
class PluginSession {
 public:
  // Throws SpawnError.
  static PluginSession launch(const PluginDescriptor& p);

  PluginSession(PluginSession&&) noexcept;
  PluginSession& operator=(PluginSession&&) noexcept;
  ~PluginSession();

  // Throws TrialFailed when the plugin no longer reads its input.
  void send(const nlohmann::json& message);
  // Next event object. Throws Timeout, ProtocolError for a line that is not
  // a JSON object with an "event" string, TrialFailed at end of output.
  nlohmann::json receive(std::chrono::milliseconds timeout);

  bool alive();
  const PluginDescriptor& descriptor() const;

 private:
  struct Impl;
  explicit PluginSession(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// hello / hello_ack then supported_hyperparameters. Throws ProtocolError on
// a malformed reply or a version mismatch.
std::set<std::string> handshake(PluginSession& session);

// Keeps the parameters the plugin supports plus "transform", which the host
// always forwards. Throws UnsupportedSpace for a supported name the space
// lacks.
SearchSpace restrict_space(const SearchSpace& space, const std::set<std::string>& supported);

struct StudyRun {
  ConfigId config;
  // Must contain a "transform" categorical.
  SearchSpace space;
  int trials = 100;
  int max_epochs = kMaxEpochs;
  std::uint64_t seed = 0;
  Registry* registry = nullptr;
  PluginDescriptor plugin;
  TpeSettings tpe;
  // Empty disables checkpointing.
  std::filesystem::path checkpoint;
};

// Throws std::invalid_argument.
void validate(const StudyRun& run);

// Splits a suggestion into the plugin's prm and the transform name.
std::pair<PrmMap, std::string> split_transform(PrmMap prm);

// Sends one train command and collects epoch events until done. Completed
// epochs are ingested in one transaction even when the trial fails. Throws
// TrialFailed (error event or plugin exit), Timeout, ProtocolError.
TrialDocument run_trial(const StudyRun& run, PluginSession& session, const PrmMap& prm,
                        const std::string& transform);

struct StudySummary {
  int completed = 0;
  int failed = 0;
  PrmMap best_prm;
  std::optional<double> best_accuracy;
};

nlohmann::json summary_to_json(const StudySummary& s);

// Called after every finished trial; handy for progress output.
using TrialObserver = std::function<void(int trial_index, const TrialDocument& doc, bool failed)>;

// Sequential ask / run_trial / observe loop resuming from `run.checkpoint`
// when it exists. Objective is the final epoch's accuracy. Failed and timed
// out trials keep their completed epochs but stay out of the TPE history.
StudySummary run_study(const StudyRun& run, const TrialObserver& on_trial = {});

// Default checkpoint location for a study stored in `db`.
std::filesystem::path default_checkpoint_path(const std::filesystem::path& db, const ConfigId& config,
                                              std::uint64_t seed);

// Built-in trainer: softmax regression on three 2-D Gaussian blobs.
struct ReferenceOptions {
  std::chrono::milliseconds epoch_delay{0};
};

// Requires lr in (0,1], momentum in [0,1), batch a power of two, in_shape
// {2} and out_shape {3}. Throws BadHyperparameter. The callback receives
// each epoch as soon as it finishes and may return false to stop early.
std::vector<EpochResult> reference_train(const std::vector<int>& in_shape, const std::vector<int>& out_shape,
                                         const PrmMap& prm, int max_epochs,
                                         const std::function<bool(const EpochResult&)>& on_epoch = {},
                                         const ReferenceOptions& options = {});

// Serves the plugin protocol until end of input. Returns the process exit
// status: 0 at end of input, 1 after a malformed host line.
int serve_reference_trainer(std::istream& in, std::ostream& out, const ReferenceOptions& options = {});

inline const std::set<std::string>& reference_hyperparameters() {
  static const std::set<std::string> names{"batch", "lr", "momentum"};
  return names;
}

}  // namespace lemur::harness
