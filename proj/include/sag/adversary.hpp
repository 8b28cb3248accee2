#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sag/gossip.hpp"
#include "sag/graph.hpp"
#include "sag/stats.hpp"

#include "json.hpp"

// The curious coalition's side of the protocol: choosing the coalition,
// filtering executions down to what it can see, and the concrete
// source-identification attacks whose success the leakage bounds cap.

namespace sag {

// One observed round: the communications touching the coalition, plus the
// phase bit (informative for dandelion only).
struct ViewEntry {
  std::vector<std::pair<int, int>> comms;  // sorted, every pair touches F
  bool anon_phase = true;

  bool operator==(const ViewEntry&) const = default;
};

// The observation sequence, re-indexed so entry 0 is the first round with a
// visible communication; later visible-empty rounds are kept. The coalition
// knows its own membership, carried here so attacks need no extra input.
struct AdversaryView {
  std::vector<ViewEntry> observations;
  std::vector<int> curious;  // sorted member ids

  bool empty() const { return observations.empty(); }
  bool operator==(const AdversaryView&) const = default;
};

enum class SelectionMode { uniform, min_vertex_cut, greedy_density };

SelectionMode selection_mode_from_string(const std::string& name);
std::string to_string(SelectionMode mode);

// How min_vertex_cut tops the cut up to f members once the cut itself is in.
enum class CutPadding { uniform_random, lowest_id };

struct SelectOptions {
  CutPadding padding = CutPadding::uniform_random;
  int connectivity_cap = 200;  // exact cut machinery is desk-scale only
};

// uniform: exact uniform f-subset. min_vertex_cut: a minimum cut padded per
// the strategy, always leaving at least one honest node on every side.
// greedy_density: repeatedly add the node that maximizes the resulting
// adversarial density, lowest id on ties. Throws std::invalid_argument when
// f is infeasible for the mode.
CuriousSet select_curious(const Graph& g, int f, SelectionMode mode, std::uint64_t seed,
                          const SelectOptions& opts = {});

// Filters each round to communications with an endpoint in F, drops the
// prefix before the first visible one, re-indexes from zero. A gossip that
// never touches F yields an empty view.
AdversaryView observe(const Execution& exec, const CuriousSet& F);

// Source distribution over the non-curious nodes.
struct Prior {
  std::vector<int> nodes;       // ascending non-curious ids
  std::vector<double> weights;  // aligned, nonnegative, sums to 1

  double weight_of(int node) const;
};

Prior uniform_prior(const Graph& g, const CuriousSet& F);
Prior point_prior(const Graph& g, const CuriousSet& F, int node);

constexpr int kAbstain = -1;

// Sender of a non-curious -> curious communication in the first observed
// entry, lowest id on ties; kAbstain on an empty view.
int first_contact_attack(const AdversaryView& view);

struct MapResult {
  int guess = kAbstain;
  // Every candidate's estimated likelihood came out zero, so the guess fell
  // back to the first-contact rule.
  bool fallback_first_contact = false;
};

// Bayes-style guess: per candidate source, Monte Carlo probability that the
// observation prefix (first prefix_length entries, compared structurally)
// comes out as observed, times the prior; argmax with lowest-id tie-break.
MapResult map_attack(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                     const Prior& prior, const AdversaryView& view, int likelihood_trials,
                     std::uint64_t seed, int prefix_length = 1);

// map_attack under the uniform prior.
MapResult mle_attack(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                     const AdversaryView& view, int likelihood_trials, std::uint64_t seed,
                     int prefix_length = 1);

enum class AttackKind { first_contact, mle, map };

AttackKind attack_kind_from_string(const std::string& name);
std::string to_string(AttackKind kind);

struct AttackOptions {
  int prefix_length = 1;
  int likelihood_trials = 2000;  // per candidate, mle and map only
  long long horizon = 0;         // 0 = default_horizon(n)
  // Exact leakage of the fixture, when known: fills the report's bound
  // (exp(epsilon)/(n-f) for mle, exp(epsilon) * mean prior mass of the
  // guess otherwise).
  std::optional<double> epsilon;
};

struct AttackReport {
  AttackKind attack = AttackKind::first_contact;
  long long trials = 0;
  long long conditioned_trials = 0;  // non-empty views; rate conditions on these
  long long successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double bound = 0.0;  // +inf when no epsilon was supplied
  bool bound_satisfied = true;
  bool fallback_used = false;  // any trial hit the degenerate-likelihood fallback
};

// Samples a source from the sampler, simulates, observes, attacks, scores.
// Trials with an empty view are excluded from the conditioned rate.
AttackReport attack_success_rate(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                                 AttackKind attack, const Prior& source_sampler, int trials,
                                 std::uint64_t seed, const AttackOptions& opts = {});

// {attack, trials, conditioned_trials, successes, rate, ci_low, ci_high,
//  bound, bound_satisfied}; infinity serializes as "inf".
nlohmann::ordered_json attack_report_json(const AttackReport& report);

}  // namespace sag
