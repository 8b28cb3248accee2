#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sag/adversary.hpp"
#include "sag/gossip.hpp"
#include "sag/graph.hpp"
#include "sag/privacy.hpp"

#include "json.hpp"

// Experiment plumbing: JSON sweep configuration, the deterministic sweep
// runner with its CSV/JSON writers, and the command line entry point.

namespace sag {

// Where a sweep point gets its graph.
struct GraphSource {
  enum class Kind { generate, named, file };
  Kind kind = Kind::generate;
  int n = 0;
  int d = 0;
  std::string name;  // named family, or the edge-list path
};

struct AdversaryConfig {
  AdversaryMode mode = AdversaryMode::worst;
  SelectionMode selection = SelectionMode::uniform;
  int f = 1;
  std::vector<int> members;  // explicit curious set; overrides selection
};

struct AttackConfig {
  AttackKind kind = AttackKind::first_contact;
  int trials = 0;  // 0 leaves the attack columns empty
  int prefix_length = 1;
  int likelihood_trials = 2000;
  bool bound_from_exact = true;  // compare against exp(epsilon_exact) when finite
};

// One JSON document drives a whole sweep; every axis list is optional and an
// empty axis means the single base value, so an axis-free config is a
// single-point run. All randomness derives from the master seed.
struct ExperimentConfig {
  GraphSource graph;
  std::vector<ProtocolSpec> protocols;  // at least one; axis order = list order
  AdversaryConfig adversary;
  AttackConfig attack;
  std::vector<int> n_axis;     // generated graphs only
  std::vector<int> d_axis;     // generated graphs only
  std::vector<int> f_axis;
  std::vector<double> rho_axis;
  int trials = 1000;
  long long horizon = 0;  // 0 = default_horizon(n)
  std::uint64_t seed = 1;
  std::string csv_path;   // empty = stdout
  std::string json_path;  // empty = not written
};

// Throws std::invalid_argument on malformed or inconsistent configs.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// One row per axis point. Numeric fields are NaN when the point failed or
// the quantity does not apply (CSV prints them empty); infinities are real
// infinities (CSV prints "inf").
struct SweepRecord {
  int n = 0;
  int d = 0;
  int f = 0;
  double rho = 0.0;
  std::string protocol;
  std::string mode;

  std::string status = "ok";  // "ok" or "error: ..."
  double lambda = 0.0;
  bool gate_passed = false;
  double epsilon_exact = 0.0;
  double epsilon_upper = 0.0;  // NaN when gated out
  double epsilon_lower = 0.0;
  double alpha_used = 0.0;
  double lemma_c10_bound = 0.0;  // NaN when the true-density audit is absent

  double mean_time = 0.0;
  double stddev_time = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  int censored = 0;

  bool attack_ran = false;
  double attack_rate = 0.0;
  double attack_ci_low = 0.0;
  double attack_ci_high = 0.0;
  double attack_bound = 0.0;
  bool attack_bound_satisfied = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ordered by (n, d, f, rho, protocol)
};

// Runs every axis point in a worker pool; per-point failures become status
// strings, never aborts. Byte-identical output for identical config + seed.
SweepResult run_sweep(const ExperimentConfig& config);

// Fixed column set, axis columns first; floats at 9 significant digits,
// infinities as "inf", NaN and skipped attacks as empty cells.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

nlohmann::ordered_json sweep_json(const SweepResult& result);

// Full command line: gen-graph, spectral, privacy, simulate, attack, sweep,
// audit. Returns the process exit code: 0 success, 1 invalid usage or
// config, 2 audit violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sag
