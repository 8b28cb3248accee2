#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sag/graph.hpp"
#include "sag/stats.hpp"

// Discrete-round execution engine for the gossip protocols, plus
// dissemination-time measurement and the auxiliary walks (die-out,
// anaconda) used for passage-probability experiments.

namespace sag {

// One synchronous round: who is active, which directed messages were sent
// (a multiset; self-messages u->u are real communications), and the phase
// bit (meaningful for dandelion, true by convention elsewhere).
struct Round {
  std::vector<int> active;                    // sorted
  std::vector<std::pair<int, int>> comms;     // sorted lexicographically
  bool anon_phase = true;

  bool operator==(const Round&) const = default;
};

constexpr int kNeverInformed = -1;

// A recorded run. rounds[0].active is the singleton source; each later
// active set is exactly the receiver set of the previous round's comms.
struct Execution {
  int source = 0;
  int t_star = 0;  // internal start index; adversary re-indexing happens downstream
  std::vector<Round> rounds;
  std::vector<int> informed_by;  // first round index each node appears active
  bool covered = false;          // every node informed within the horizon

  // Largest first-informed round; only meaningful when covered.
  int coverage_time() const;
};

enum class ProtocolKind {
  random_walk,
  cobra,
  dandelion,
  muting_push,
  two_cobra,
  die_out_walk,
  anaconda,
};

ProtocolKind protocol_kind_from_string(const std::string& name);
std::string to_string(ProtocolKind kind);

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::cobra;
  double rho = 0.0;
  int b = 0;  // branch budget, anaconda only
};

// random_walk and two_cobra are the rho = 0 and rho = 1 cobra endpoints.
double effective_rho(const ProtocolSpec& spec);

// Default round cap: comfortably above random-walk cover time, so censoring
// is negligible for any rho >= 0.
long long default_horizon(int n);

// Runs one execution. Deterministic given seed. `curious` is consulted only
// by die_out_walk (the walk dies on curious contact); other protocols ignore
// it. Stops once every node is informed or the horizon is reached.
Execution simulate(const Graph& g, const ProtocolSpec& spec, int source, long long horizon,
                   std::uint64_t seed, const CuriousSet* curious = nullptr);

struct DisseminationStats {
  double mean = 0.0;
  double stddev = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  int censored = 0;  // trials that hit the horizon; excluded from the moments
  int trials = 0;
};

DisseminationStats dissemination_time(const Graph& g, const ProtocolSpec& spec, int source,
                                      int trials, std::uint64_t seed, long long horizon = 0);

// Death site W of the die-out walk from source: absorbed in place with
// probability rho per step, otherwise absorbed at the sender the moment it
// would step onto a curious node. Its law is the matching column of
// absorbing_probabilities.
int die_out_death_site(const Graph& g, const CuriousSet& F, double rho, int source,
                       std::mt19937_64& rng);
int die_out_death_site(const Graph& g, const CuriousSet& F, double rho, int source,
                       std::uint64_t seed);

struct PassageEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  long long successes = 0;
  long long trials = 0;
};

// Monte Carlo estimate of the probability that the protocol started at u is
// at some round exactly the singleton {v} with no active set having touched
// F yet (and, for dandelion, the phase bit still up). 95% Wilson interval.
PassageEstimate passage_probability(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                                    int u, int v, int trials, std::uint64_t seed,
                                    long long horizon = 0);

// Trace serialization: JSON lines, one round per line,
// {"t": int, "active": [ids], "comms": [[u,v],...], "anon": bool}.
void write_trace(const Execution& exec, std::ostream& out);

}  // namespace sag
