#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cosetlab/oracleworld.h"

namespace cosetlab::harness {

using json = nlohmann::json;

inline constexpr const char* kSchema = "v1";

struct ExperimentConfig {
  std::string id;
  oracle::Seed seed{};
  uint64_t trials = 0;  // 0 selects the experiment default
  json params = json::object();
  std::string out;      // report path; empty writes nothing
  int threads = 0;      // 0 uses the hardware concurrency

  json to_json() const;
};

struct RateStats {
  uint64_t successes = 0;
  uint64_t trials = 0;
  double rate = 0;
  double std_err = 0;
  double ci_low = 0;
  double ci_high = 0;

  bool contains(double p) const { return ci_low <= p && p <= ci_high; }
  json to_json() const;
};

// Wilson score interval with z standard deviations.
RateStats wilson(uint64_t successes, uint64_t trials, double z);

// Declared acceptance tolerances, one object per experiment id plus a
// global "wilson_z".
class Tolerances {
 public:
  Tolerances() = default;
  explicit Tolerances(json manifest);
  static Tolerances load(const std::string& path);

  double z() const;
  // Throws std::out_of_range when the manifest lacks the experiment or key.
  const json& of(const std::string& id) const;
  double get(const std::string& id, const std::string& key) const;
  const json& manifest() const { return manifest_; }

 private:
  json manifest_ = json::object();
};

// Path of the checked-in manifest.
std::string default_tolerance_path();

struct Report {
  json config;
  std::vector<json> records;
  json aggregate = json::object();
  json tolerance = json::object();
  bool pass = false;
  double elapsed_s = 0;

  // Everything except elapsed_s is a function of the config.
  json to_json() const;
};

struct Context {
  const ExperimentConfig& config;
  const Tolerances& tol;
  uint64_t trials;

  const json& tolerance() const { return tol.of(config.id); }
  double tolerance(const std::string& key) const { return tol.get(config.id, key); }
  int param_int(const std::string& key, int fallback) const;
  std::string param_str(const std::string& key, const std::string& fallback) const;
  oracle::Seed derive(std::string_view label, uint64_t index = 0) const {
    return oracle::derive_seed(config.seed, label, index);
  }
};

struct Experiment {
  std::string id;
  std::string summary;
  uint64_t default_trials;
  std::function<void(const Context&, Report&)> body;
};

const std::vector<Experiment>& registry();
std::vector<std::string> experiment_ids();

// Throws std::invalid_argument for an unknown id.
Report run(const ExperimentConfig& config, const Tolerances& tol);
void write_report(const Report& r, const std::string& path);

// Trial i sees rng_from_seed(derive_seed(seed, "trial", i)); records come
// back in trial order whatever the thread count.
std::vector<json> run_trials(uint64_t trials, const oracle::Seed& seed, int threads,
                             const std::function<json(uint64_t, Rng&)>& trial);

}  // namespace cosetlab::harness
