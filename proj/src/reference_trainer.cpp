#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

#include "lemur/error.hpp"
#include "lemur/harness.hpp"
#include "lemur/metrics.hpp"
#include "lemur/rng.hpp"

namespace lemur::harness {
namespace {

constexpr int kDim = 2;
constexpr int kClasses = 3;
constexpr int kTrainPerClass = 100;
constexpr int kTestPerClass = 50;
constexpr double kSigma = 1.0;
constexpr std::uint64_t kDataSeed = 0x5eed'b10b5ULL;
// Makes the untrained model predict class 0 everywhere.
constexpr double kInitialBias0 = 1e-3;

struct Sample {
  std::array<double, kDim> x;
  int label;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Equilateral triangle with side 6 sigma.
constexpr std::array<std::array<double, kDim>, kClasses> kCenters = {{
    {0.0, 2.0 * 1.7320508075688772 * kSigma},
    {-3.0 * kSigma, -1.7320508075688772 * kSigma},
    {3.0 * kSigma, -1.7320508075688772 * kSigma},
}};

const Dataset& blobs() {
  static const Dataset data = [] {
    Dataset d;
    Rng rng(kDataSeed);
    auto draw = [&](std::vector<Sample>& out, int per_class) {
      for (int i = 0; i < per_class; ++i) {
        for (int c = 0; c < kClasses; ++c) {
          Sample s{};
          for (int k = 0; k < kDim; ++k) s.x[k] = kCenters[c][k] + kSigma * rng.normal();
          s.label = c;
          out.push_back(s);
        }
      }
    };
    draw(d.train, kTrainPerClass);
    draw(d.test, kTestPerClass);
    return d;
  }();
  return data;
}

struct Model {
  std::array<std::array<double, kDim>, kClasses> w{};
  std::array<double, kClasses> b{kInitialBias0, 0.0, 0.0};

  std::array<double, kClasses> logits(const std::array<double, kDim>& x) const {
    std::array<double, kClasses> z{};
    for (int c = 0; c < kClasses; ++c) {
      z[c] = b[c];
      for (int k = 0; k < kDim; ++k) z[c] += w[c][k] * x[k];
    }
    return z;
  }

  int predict(const std::array<double, kDim>& x) const {
    const auto z = logits(x);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
};

std::array<double, kClasses> softmax(std::array<double, kClasses> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

double require_real(const PrmMap& prm, const char* key) {
  auto it = prm.find(key);
  if (it == prm.end()) throw BadHyperparameter(std::string("missing hyperparameter '") + key + "'");
  return as_real(it->second);
}

std::int64_t require_batch(const PrmMap& prm) {
  auto it = prm.find("batch");
  if (it == prm.end()) throw BadHyperparameter("missing hyperparameter 'batch'");
  const auto* v = std::get_if<std::int64_t>(&it->second);
  if (v == nullptr || *v < 1 || (*v & (*v - 1)) != 0) {
    throw BadHyperparameter("batch must be a positive power of two");
  }
  return *v;
}

}  // namespace

std::vector<EpochResult> reference_train(const std::vector<int>& in_shape, const std::vector<int>& out_shape,
                                         const PrmMap& prm, int max_epochs,
                                         const std::function<bool(const EpochResult&)>& on_epoch,
                                         const ReferenceOptions& options) {
  if (in_shape != std::vector<int>{kDim} || out_shape != std::vector<int>{kClasses}) {
    throw BadHyperparameter("reference trainer needs in_shape [2] and out_shape [3]");
  }
  const double lr = require_real(prm, "lr");
  const double momentum = require_real(prm, "momentum");
  const std::int64_t batch = require_batch(prm);
  if (!(lr > 0.0 && lr <= 1.0)) throw BadHyperparameter("lr must lie in (0,1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw BadHyperparameter("momentum must lie in [0,1)");
  if (max_epochs < 1 || max_epochs > kMaxEpochs) throw BadHyperparameter("max_epochs must lie in [1,50]");

  const Dataset& data = blobs();
  Model model;
  std::array<std::array<double, kDim>, kClasses> vw{};
  std::array<double, kClasses> vb{};
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<int> truth;
  for (const Sample& s : data.test) truth.push_back(s.label);

  std::vector<EpochResult> results;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng shuffle(mix_seed(kDataSeed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(batch)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch));
      std::array<std::array<double, kDim>, kClasses> gw{};
      std::array<double, kClasses> gb{};
      for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = data.train[order[i]];
        auto p = softmax(model.logits(s.x));
        p[s.label] -= 1.0;
        for (int c = 0; c < kClasses; ++c) {
          gb[c] += p[c];
          for (int k = 0; k < kDim; ++k) gw[c][k] += p[c] * s.x[k];
        }
      }
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (int c = 0; c < kClasses; ++c) {
        vb[c] = momentum * vb[c] - lr * gb[c] * scale;
        model.b[c] += vb[c];
        for (int k = 0; k < kDim; ++k) {
          vw[c][k] = momentum * vw[c][k] - lr * gw[c][k] * scale;
          model.w[c][k] += vw[c][k];
        }
      }
    }
    std::vector<int> predicted;
    for (const Sample& s : data.test) predicted.push_back(model.predict(s.x));
    const double acc = metrics::accuracy(predicted, truth);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto ns = std::max<std::int64_t>(1, std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
    results.push_back(EpochResult{epoch, acc, ns});
    if (options.epoch_delay.count() > 0) std::this_thread::sleep_for(options.epoch_delay);
    if (on_epoch && !on_epoch(results.back())) break;
  }
  return results;
}

int serve_reference_trainer(std::istream& in, std::ostream& out, const ReferenceOptions& options) {
  auto emit = [&](const nlohmann::json& j) { out << j.dump() << '\n' << std::flush; };
  auto fail = [&](const std::string& message) { emit({{"event", "error"}, {"message", message}}); };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("cmd") || !msg["cmd"].is_string()) {
      fail("malformed host line");
      return 1;
    }
    const std::string cmd = msg["cmd"].get<std::string>();
    if (cmd == "hello") {
      if (!msg.contains("version") || msg["version"] != kProtocolVersion) {
        fail("unsupported protocol version");
        continue;
      }
      emit({{"event", "hello_ack"}, {"version", kProtocolVersion}});
    } else if (cmd == "supported_hyperparameters") {
      emit({{"event", "hyperparameters"}, {"names", reference_hyperparameters()}});
    } else if (cmd == "train") {
      try {
        const PrmMap prm = prm_from_json(msg.at("prm"));
        const auto in_shape = msg.at("in_shape").get<std::vector<int>>();
        const auto out_shape = msg.at("out_shape").get<std::vector<int>>();
        const int max_epochs = msg.at("max_epochs").get<int>();
        reference_train(
            in_shape, out_shape, prm, max_epochs,
            [&](const EpochResult& r) {
              emit({{"event", "epoch"}, {"epoch", r.epoch}, {"accuracy", r.accuracy}, {"duration_ns", r.duration_ns}});
              return true;
            },
            options);
        emit({{"event", "done"}});
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else {
      fail("unknown command '" + cmd + "'");
    }
  }
  return 0;
}

}  // namespace lemur::harness
