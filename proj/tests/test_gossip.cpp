#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sag/gossip.hpp"
#include "sag/graph.hpp"
#include "sag/rng.hpp"

#include "json.hpp"

using namespace sag;

namespace {

std::vector<int> receivers(const std::vector<std::pair<int, int>>& comms) {
  std::vector<int> out;
  for (const auto& [from, to] : comms) out.push_back(to);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Structural invariants every recorded execution must satisfy, whatever the
// protocol or seed.
void audit_execution(const Graph& g, const Execution& exec, const ProtocolSpec& spec) {
  REQUIRE_FALSE(exec.rounds.empty());
  CHECK(exec.rounds.front().active == std::vector<int>{exec.source});

  std::vector<int> first_seen(g.n, kNeverInformed);
  bool anon_was_down = false;
  for (std::size_t t = 0; t < exec.rounds.size(); ++t) {
    const Round& round = exec.rounds[t];

    CHECK(std::is_sorted(round.active.begin(), round.active.end()));
    CHECK(std::adjacent_find(round.active.begin(), round.active.end()) == round.active.end());
    CHECK_FALSE(round.active.empty());
    for (int v : round.active) {
      if (first_seen[v] == kNeverInformed) first_seen[v] = static_cast<int>(t);
    }

    CHECK(std::is_sorted(round.comms.begin(), round.comms.end()));
    for (const auto& [from, to] : round.comms) {
      CHECK(std::binary_search(round.active.begin(), round.active.end(), from));
      if (from != to) {
        CHECK(g.has_edge(from, to));
      } else {
        CHECK(spec.kind == ProtocolKind::muting_push);
      }
    }

    if (t + 1 < exec.rounds.size()) {
      CHECK(exec.rounds[t + 1].active == receivers(round.comms));
    }

    if (spec.kind == ProtocolKind::dandelion) {
      if (!round.anon_phase) anon_was_down = true;
      if (anon_was_down) CHECK_FALSE(round.anon_phase);  // the token never comes back
    } else {
      CHECK(round.anon_phase);
    }
  }

  // informed_by is exactly the first round each node shows up active, except
  // that nodes informed by the final round's comms never appear active.
  bool all_informed = true;
  for (int v = 0; v < g.n; ++v) {
    if (first_seen[v] != kNeverInformed) {
      CHECK(exec.informed_by[v] == first_seen[v]);
    } else if (exec.informed_by[v] != kNeverInformed) {
      CHECK(exec.informed_by[v] == static_cast<int>(exec.rounds.size()));
      const auto& last = exec.rounds.back().comms;
      CHECK(std::any_of(last.begin(), last.end(),
                        [v](const std::pair<int, int>& c) { return c.second == v; }));
    }
    all_informed = all_informed && exec.informed_by[v] != kNeverInformed;
  }
  CHECK(exec.covered == all_informed);
  CHECK(exec.informed_by[exec.source] == 0);
}

}  // namespace

TEST_CASE("protocol names round-trip") {
  const ProtocolKind kinds[] = {ProtocolKind::random_walk, ProtocolKind::cobra,
                                ProtocolKind::dandelion,   ProtocolKind::muting_push,
                                ProtocolKind::two_cobra,   ProtocolKind::die_out_walk,
                                ProtocolKind::anaconda};
  for (ProtocolKind kind : kinds) CHECK(protocol_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(protocol_kind_from_string("flooding"), std::invalid_argument);
}

TEST_CASE("effective rho pins the protocol endpoints") {
  CHECK(effective_rho({ProtocolKind::random_walk, 0.7, 0}) == 0.0);
  CHECK(effective_rho({ProtocolKind::two_cobra, 0.2, 0}) == 1.0);
  CHECK(effective_rho({ProtocolKind::cobra, 0.3, 0}) == 0.3);
  CHECK_THROWS_AS(effective_rho({ProtocolKind::cobra, 1.5, 0}), std::invalid_argument);
  CHECK_THROWS_AS(effective_rho({ProtocolKind::cobra, -0.1, 0}), std::invalid_argument);
}

TEST_CASE("default horizon grows like n log n") {
  CHECK(default_horizon(2) == 139);
  CHECK(default_horizon(1) == 139);  // clamped to the two-node scale
  CHECK(default_horizon(16) == 4437);
}

TEST_CASE("a single edge is informed in one round") {
  const Graph g = named_graph("complete", 2);
  const Execution exec = simulate(g, {ProtocolKind::random_walk, 0.0, 0}, 0, 10, 5);
  CHECK(exec.covered);
  CHECK(exec.rounds.size() == 1);
  CHECK(exec.rounds[0].comms == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(exec.informed_by == std::vector<int>{0, 1});
  CHECK(exec.coverage_time() == 1);
}

TEST_CASE("dandelion with an immediate phase drop broadcasts") {
  const Graph g = named_graph("complete", 3);
  const Execution exec = simulate(g, {ProtocolKind::dandelion, 1.0, 0}, 0, 50, 9);
  CHECK(exec.covered);
  CHECK(exec.rounds.size() == 1);
  CHECK_FALSE(exec.rounds[0].anon_phase);
  CHECK(exec.rounds[0].comms == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}});
  CHECK(exec.coverage_time() == 1);
}

TEST_CASE("dandelion broadcast covers a cycle at graph distance") {
  const Graph g = named_graph("cycle", 8);
  const DisseminationStats stats =
      dissemination_time(g, {ProtocolKind::dandelion, 1.0, 0}, 0, 50, 31);
  CHECK(stats.censored == 0);
  CHECK(stats.mean == 4.0);
  CHECK(stats.stddev == 0.0);
  CHECK(stats.p50 == 4.0);
  CHECK(stats.p99 == 4.0);
}

TEST_CASE("a walk keeps exactly one active node") {
  const Graph g = named_graph("cycle", 6);
  const Execution exec = simulate(g, {ProtocolKind::cobra, 0.0, 0}, 2, 400, 17);
  for (const Round& round : exec.rounds) {
    CHECK(round.active.size() == 1);
    CHECK(round.comms.size() == 1);
  }
  audit_execution(g, exec, {ProtocolKind::cobra, 0.0, 0});
}

TEST_CASE("executions are deterministic in the seed") {
  const Graph g = named_graph("cycle", 4);
  const ProtocolSpec spec{ProtocolKind::muting_push, 0.5, 0};
  const Execution a = simulate(g, spec, 1, 200, 3);
  const Execution b = simulate(g, spec, 1, 200, 3);
  CHECK(a.rounds == b.rounds);
  CHECK(a.informed_by == b.informed_by);
  CHECK(a.covered == b.covered);
  audit_execution(g, a, spec);
}

TEST_CASE("structural audit across protocols, graphs, and seeds") {
  const Graph graphs[] = {generate_random_regular(12, 4, 101), named_graph("cycle", 9),
                          named_graph("complete", 6)};
  const ProtocolSpec specs[] = {
      {ProtocolKind::random_walk, 0.0, 0}, {ProtocolKind::cobra, 0.3, 0},
      {ProtocolKind::dandelion, 0.3, 0},   {ProtocolKind::muting_push, 0.3, 0},
      {ProtocolKind::two_cobra, 0.0, 0},   {ProtocolKind::die_out_walk, 0.2, 0},
      {ProtocolKind::anaconda, 0.5, 3},
  };
  for (const Graph& g : graphs) {
    const CuriousSet F = make_curious_set(g, {g.n - 1});
    for (const ProtocolSpec& spec : specs) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const int source = spec.kind == ProtocolKind::die_out_walk ? 0 : g.n - 1;
        const Execution exec = simulate(g, spec, source, 300, seed,
                                        spec.kind == ProtocolKind::die_out_walk ? &F : nullptr);
        audit_execution(g, exec, spec);
      }
    }
  }
}

TEST_CASE("branching accelerates coverage on the complete graph") {
  const Graph g = named_graph("complete", 16);
  const DisseminationStats doubling =
      dissemination_time(g, {ProtocolKind::two_cobra, 0.0, 0}, 0, 300, 41);
  CHECK(doubling.censored == 0);
  CHECK(doubling.mean >= 4.0);  // information at most doubles per round
  CHECK(doubling.mean < 20.0);
  CHECK(doubling.p50 <= doubling.p90);
  CHECK(doubling.p90 <= doubling.p99);

  const DisseminationStats walking =
      dissemination_time(g, {ProtocolKind::random_walk, 0.0, 0}, 0, 300, 43);
  CHECK(walking.censored == 0);
  CHECK(doubling.mean < walking.mean);
}

TEST_CASE("trials that outrun the horizon are censored") {
  const Graph g = named_graph("cycle", 8);
  const DisseminationStats stats =
      dissemination_time(g, {ProtocolKind::random_walk, 0.0, 0}, 0, 30, 7, 1);
  CHECK(stats.censored == 30);
  CHECK(stats.trials == 30);
  CHECK(stats.mean == 0.0);
}

TEST_CASE("anaconda honors its branch budget") {
  const Graph g = named_graph("complete", 8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Execution exec = simulate(g, {ProtocolKind::anaconda, 1.0, 3}, 0, 200, seed);
    for (const Round& round : exec.rounds) CHECK(round.active.size() <= 4);
  }
  // Budget zero degenerates to a single walker regardless of rho.
  const Execution walk = simulate(g, {ProtocolKind::anaconda, 1.0, 0}, 0, 200, 11);
  for (const Round& round : walk.rounds) CHECK(round.active.size() == 1);
}

TEST_CASE("simulate validates its inputs") {
  const Graph g = named_graph("cycle", 4);
  CHECK_THROWS_AS(simulate(g, {ProtocolKind::cobra, 0.0, 0}, -1, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(g, {ProtocolKind::cobra, 0.0, 0}, 4, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(g, {ProtocolKind::cobra, 0.0, 0}, 0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(g, {ProtocolKind::anaconda, 0.5, -1}, 0, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(dissemination_time(g, {ProtocolKind::cobra, 0.0, 0}, 0, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("death sites follow the absorbing chain law") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const int trials = 1000000;

  std::mt19937_64 rng(rng_for(51, 0));
  std::vector<long long> hits(g.n, 0);
  for (int t = 0; t < trials; ++t) ++hits[die_out_death_site(g, F, 0.0, 0, rng)];

  const double p0 = static_cast<double>(hits[0]) / trials;
  const double p2 = static_cast<double>(hits[2]) / trials;
  CHECK(hits[1] == 0);
  CHECK(hits[3] == 0);
  CHECK(std::abs(p0 - 0.75) < 0.005);
  CHECK(std::abs(p2 - 0.25) < 0.005);

  const double tv = 0.5 * (std::abs(p0 - 0.75) + std::abs(p2 - 0.25));
  CHECK(tv < 0.01);
}

TEST_CASE("death site corner cases") {
  const Graph g = named_graph("cycle", 4);

  // Every neighbor curious: the walk can never leave its source.
  const CuriousSet surround = make_curious_set(g, {1, 3});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(die_out_death_site(g, surround, 0.0, 0, seed) == 0);
  }

  // Certain in-place death.
  const CuriousSet F = make_curious_set(g, {3});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(die_out_death_site(g, F, 1.0, 2, seed) == 2);
  }

  CHECK_THROWS_AS(die_out_death_site(g, F, 0.0, 3, std::uint64_t{1}), std::invalid_argument);
  CHECK_THROWS_AS(die_out_death_site(g, F, 0.0, 5, std::uint64_t{1}), std::invalid_argument);
  CHECK_THROWS_AS(die_out_death_site(g, F, 1.5, 0, std::uint64_t{1}), std::invalid_argument);
}

TEST_CASE("passage from a node to itself is certain") {
  const Graph g = named_graph("cycle", 8);
  const CuriousSet F = make_curious_set(g, {4});
  const PassageEstimate est =
      passage_probability(g, F, {ProtocolKind::cobra, 0.5, 0}, 0, 0, 100, 13);
  CHECK(est.estimate == 1.0);
  CHECK(est.successes == 100);
  CHECK(est.ci_high == 1.0);
}

TEST_CASE("walk passage matches the harmonic value on the four-cycle") {
  // From node 2, reaching 0 before stepping onto curious node 3 has
  // probability exactly 1/3.
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const PassageEstimate est =
      passage_probability(g, F, {ProtocolKind::random_walk, 0.0, 0}, 2, 0, 20000, 29);
  CHECK(est.ci_low <= 1.0 / 3.0);
  CHECK(est.ci_high >= 1.0 / 3.0);
  CHECK(std::abs(est.estimate - 1.0 / 3.0) < 0.02);
  CHECK(est.ci_low <= est.estimate);
  CHECK(est.estimate <= est.ci_high);
}

TEST_CASE("passage through a separating curious set is impossible") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {0, 2});
  const PassageEstimate est =
      passage_probability(g, F, {ProtocolKind::random_walk, 0.0, 0}, 1, 3, 500, 37);
  CHECK(est.estimate == 0.0);
  CHECK(est.successes == 0);
  CHECK(est.ci_low == 0.0);
}

TEST_CASE("dandelion passage dies with the phase token") {
  const Graph g = named_graph("cycle", 8);
  const CuriousSet F = make_curious_set(g, {4});
  const PassageEstimate gone =
      passage_probability(g, F, {ProtocolKind::dandelion, 1.0, 0}, 0, 2, 200, 53);
  CHECK(gone.estimate == 0.0);
  // Judged on the pre-round state, so u = v still succeeds at t = 0.
  const PassageEstimate self =
      passage_probability(g, F, {ProtocolKind::dandelion, 1.0, 0}, 0, 0, 50, 53);
  CHECK(self.estimate == 1.0);
}

TEST_CASE("passage validates protocol and endpoints") {
  const Graph g = named_graph("cycle", 8);
  const CuriousSet F = make_curious_set(g, {4});
  CHECK_THROWS_AS(passage_probability(g, F, {ProtocolKind::muting_push, 0.5, 0}, 0, 2, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(passage_probability(g, F, {ProtocolKind::die_out_walk, 0.5, 0}, 0, 2, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(passage_probability(g, F, {ProtocolKind::cobra, 0.5, 0}, 4, 2, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(passage_probability(g, F, {ProtocolKind::cobra, 0.5, 0}, 0, 4, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(passage_probability(g, F, {ProtocolKind::cobra, 0.5, 0}, 0, 2, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("traces serialize one round per line") {
  const Graph g = named_graph("cycle", 4);
  const Execution exec = simulate(g, {ProtocolKind::muting_push, 0.5, 0}, 1, 20, 7);
  std::ostringstream out;
  write_trace(exec, out);

  std::istringstream in(out.str());
  std::string line;
  std::size_t t = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(t < exec.rounds.size());
    CHECK(j["t"] == t);
    CHECK(j["active"].get<std::vector<int>>() == exec.rounds[t].active);
    CHECK(j["anon"] == exec.rounds[t].anon_phase);
    REQUIRE(j["comms"].is_array());
    CHECK(j["comms"].size() == exec.rounds[t].comms.size());
    for (std::size_t k = 0; k < exec.rounds[t].comms.size(); ++k) {
      CHECK(j["comms"][k][0] == exec.rounds[t].comms[k].first);
      CHECK(j["comms"][k][1] == exec.rounds[t].comms[k].second);
    }
    ++t;
  }
  CHECK(t == exec.rounds.size());
}
