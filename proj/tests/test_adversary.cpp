#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sag/adversary.hpp"
#include "sag/gossip.hpp"
#include "sag/graph.hpp"
#include "sag/privacy.hpp"
#include "sag/rng.hpp"

using namespace sag;

namespace {

AdversaryView hand_view(std::vector<int> curious,
                        std::vector<std::vector<std::pair<int, int>>> rounds) {
  AdversaryView view;
  view.curious = std::move(curious);
  std::sort(view.curious.begin(), view.curious.end());
  for (auto& comms : rounds) {
    ViewEntry entry;
    entry.comms = std::move(comms);
    view.observations.push_back(std::move(entry));
  }
  return view;
}

}  // namespace

TEST_CASE("selection mode names round-trip") {
  const SelectionMode modes[] = {SelectionMode::uniform, SelectionMode::min_vertex_cut,
                                 SelectionMode::greedy_density};
  for (SelectionMode mode : modes) CHECK(selection_mode_from_string(to_string(mode)) == mode);
  CHECK_THROWS_AS(selection_mode_from_string("colluding"), std::invalid_argument);
}

TEST_CASE("uniform selection is a deterministic sample of the right size") {
  const Graph g = named_graph("cycle", 10);
  const CuriousSet a = select_curious(g, 3, SelectionMode::uniform, 7);
  const CuriousSet b = select_curious(g, 3, SelectionMode::uniform, 7);
  CHECK(a.members == b.members);
  CHECK(a.f() == 3);
  CHECK(std::is_sorted(a.members.begin(), a.members.end()));

  CHECK_THROWS_AS(select_curious(g, 0, SelectionMode::uniform, 7), std::invalid_argument);
  CHECK_THROWS_AS(select_curious(g, 9, SelectionMode::uniform, 7), std::invalid_argument);
}

TEST_CASE("greedy density selection maximizes the worst honest neighborhood") {
  // On the complete graph every choice is equivalent; ties resolve to the
  // lowest ids and any f = 2 set gives density 2/3.
  const Graph k4 = named_graph("complete", 4);
  const CuriousSet fk = select_curious(k4, 2, SelectionMode::greedy_density, 1);
  CHECK(fk.members == std::vector<int>{0, 1});
  CHECK(adversarial_density(k4, fk).value() == doctest::Approx(2.0 / 3.0));

  // On the six-cycle the second pick closes a gap of two around node 1,
  // pinning its whole neighborhood.
  const Graph c6 = named_graph("cycle", 6);
  const CuriousSet fc = select_curious(c6, 2, SelectionMode::greedy_density, 1);
  CHECK(fc.members == std::vector<int>{0, 2});
  CHECK(adversarial_density(c6, fc).value() == 1.0);

  const Graph path = named_graph("path", 4);
  CHECK_THROWS_AS(select_curious(path, 1, SelectionMode::greedy_density, 1),
                  std::invalid_argument);
}

TEST_CASE("vertex cut selection disconnects the honest subgraph") {
  const Graph g = named_graph("cycle", 6);
  for (CutPadding padding : {CutPadding::uniform_random, CutPadding::lowest_id}) {
    SelectOptions opts;
    opts.padding = padding;
    const CuriousSet F = select_curious(g, 2, SelectionMode::min_vertex_cut, 5, opts);
    CHECK(F.f() == 2);
    CHECK_FALSE(induced_subgraph_connected(g, F));

    // With padding the set still disconnects and every side keeps a node.
    const CuriousSet padded = select_curious(g, 3, SelectionMode::min_vertex_cut, 5, opts);
    CHECK(padded.f() == 3);
    CHECK_FALSE(induced_subgraph_connected(g, padded));
  }

  // Deterministic padding picks the lowest feasible ids.
  SelectOptions lowest;
  lowest.padding = CutPadding::lowest_id;
  const CuriousSet a = select_curious(g, 3, SelectionMode::min_vertex_cut, 5, lowest);
  const CuriousSet b = select_curious(g, 3, SelectionMode::min_vertex_cut, 99, lowest);
  CHECK(a.members == b.members);
}

TEST_CASE("vertex cut selection reports infeasible budgets") {
  // The cycle needs two curious nodes to disconnect.
  const Graph c6 = named_graph("cycle", 6);
  CHECK_THROWS_AS(select_curious(c6, 1, SelectionMode::min_vertex_cut, 1), std::invalid_argument);

  // The complete graph needs n - 2 > f.
  const Graph k4 = named_graph("complete", 4);
  CHECK_THROWS_AS(select_curious(k4, 2, SelectionMode::min_vertex_cut, 1), std::invalid_argument);

  // A star disconnects into singletons: no room for padding beyond the hub.
  std::vector<std::pair<int, int>> spokes;
  for (int leaf = 1; leaf < 7; ++leaf) spokes.emplace_back(0, leaf);
  const Graph star = make_graph(7, spokes);
  const CuriousSet hub = select_curious(star, 1, SelectionMode::min_vertex_cut, 1);
  CHECK(hub.members == std::vector<int>{0});
  CHECK_THROWS_AS(select_curious(star, 2, SelectionMode::min_vertex_cut, 1),
                  std::invalid_argument);
}

TEST_CASE("observation filters to curious contacts and drops the silent prefix") {
  Execution exec;
  exec.source = 0;
  exec.informed_by = {0, 1, 2, -1};
  Round r0;
  r0.active = {0};
  r0.comms = {{0, 1}};
  Round r1;
  r1.active = {1};
  r1.comms = {{1, 2}};
  Round r2;
  r2.active = {2};
  r2.comms = {{2, 1}};
  Round r3;
  r3.active = {1};
  r3.comms = {{1, 0}};
  exec.rounds = {r0, r1, r2, r3};

  const CuriousSet F{{2}};
  const AdversaryView view = observe(exec, F);
  CHECK(view.curious == std::vector<int>{2});
  REQUIRE(view.observations.size() == 3);  // leading silence dropped, inner kept
  CHECK(view.observations[0].comms == std::vector<std::pair<int, int>>{{1, 2}});
  CHECK(view.observations[1].comms == std::vector<std::pair<int, int>>{{2, 1}});
  CHECK(view.observations[2].comms.empty());
  CHECK_FALSE(view.empty());

  const CuriousSet far{{3}};
  CHECK(observe(exec, far).empty());
}

TEST_CASE("observation of a simulated run is sound and complete") {
  const Graph g = named_graph("cycle", 6);
  const CuriousSet F = make_curious_set(g, {2});
  const Execution exec = simulate(g, {ProtocolKind::cobra, 0.4, 0}, 5, 300, 23);
  const AdversaryView view = observe(exec, F);

  // Re-derive the filtered rounds and the index of the first visible one.
  std::vector<std::vector<std::pair<int, int>>> filtered;
  for (const Round& round : exec.rounds) {
    std::vector<std::pair<int, int>> kept;
    for (const auto& comm : round.comms) {
      if (comm.first == 2 || comm.second == 2) kept.push_back(comm);
    }
    filtered.push_back(std::move(kept));
  }
  std::size_t first = 0;
  while (first < filtered.size() && filtered[first].empty()) ++first;

  REQUIRE(view.observations.size() == filtered.size() - first);
  for (std::size_t i = 0; i < view.observations.size(); ++i) {
    CHECK(view.observations[i].comms == filtered[first + i]);
  }
  if (!view.observations.empty()) CHECK_FALSE(view.observations.front().comms.empty());
}

TEST_CASE("a dropped phase token is visible to the adversary") {
  const Graph g = named_graph("complete", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const Execution exec = simulate(g, {ProtocolKind::dandelion, 1.0, 0}, 0, 50, 3);
  const AdversaryView view = observe(exec, F);
  REQUIRE_FALSE(view.empty());
  CHECK_FALSE(view.observations.front().anon_phase);
}

TEST_CASE("first contact attack picks the lowest honest sender") {
  CHECK(first_contact_attack(hand_view({2}, {{{5, 2}, {3, 2}}})) == 3);
  CHECK(first_contact_attack(hand_view({2}, {{{4, 2}, {2, 5}}})) == 4);
  // Curious-to-honest traffic alone names no honest sender.
  CHECK(first_contact_attack(hand_view({2}, {{{2, 5}}})) == kAbstain);
  CHECK(first_contact_attack(hand_view({2}, {})) == kAbstain);
}

TEST_CASE("priors expose aligned weights") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const Prior uniform = uniform_prior(g, F);
  CHECK(uniform.nodes == std::vector<int>{0, 1, 2});
  CHECK(uniform.weight_of(1) == doctest::Approx(1.0 / 3.0));
  CHECK(uniform.weight_of(3) == 0.0);

  const Prior point = point_prior(g, F, 2);
  CHECK(point.weight_of(2) == 1.0);
  CHECK(point.weight_of(0) == 0.0);
  CHECK_THROWS_AS(point_prior(g, F, 3), std::invalid_argument);
}

TEST_CASE("likelihood attack recovers the nearest source on the four-cycle") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const ProtocolSpec walk{ProtocolKind::random_walk, 0.0, 0};

  // P(first visible comm is 2 -> 3 | source) is 3/4, 1/2, 1/4 for sources
  // 2, 1, 0, so the maximum-likelihood guess is 2.
  const AdversaryView seen = hand_view({3}, {{{2, 3}}});
  const MapResult mle = mle_attack(g, F, walk, seen, 2000, 11);
  CHECK(mle.guess == 2);
  CHECK_FALSE(mle.fallback_first_contact);

  // A point prior overrides the likelihood ordering.
  const MapResult map = map_attack(g, F, walk, point_prior(g, F, 0), seen, 2000, 11);
  CHECK(map.guess == 0);
  CHECK_FALSE(map.fallback_first_contact);

  // A view the model never generates falls back to first contact.
  const AdversaryView impossible = hand_view({3}, {{{0, 3}, {2, 3}}});
  const MapResult fallen = mle_attack(g, F, walk, impossible, 500, 11);
  CHECK(fallen.fallback_first_contact);
  CHECK(fallen.guess == 0);

  CHECK_THROWS_AS(mle_attack(g, F, walk, hand_view({3}, {}), 100, 1), std::invalid_argument);

  Prior bad;
  bad.nodes = {0, 1};
  bad.weights = {0.5, 0.5};
  CHECK_THROWS_AS(map_attack(g, F, walk, bad, seen, 100, 1), std::invalid_argument);
}

TEST_CASE("first contact success rate matches the harmonic mix on the four-cycle") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  AttackOptions opts;
  opts.epsilon = std::log(3.0);
  const AttackReport report =
      attack_success_rate(g, F, {ProtocolKind::random_walk, 0.0, 0}, AttackKind::first_contact,
                          uniform_prior(g, F), 3000, 61, opts);

  CHECK(report.trials == 3000);
  CHECK(report.conditioned_trials == 3000);  // the walk always reaches the curious node
  // P(success | source) is 3/4, 1/2, 1/4 across the three sources.
  CHECK(std::abs(report.rate - 0.5) < 0.03);
  CHECK(report.ci_low <= report.rate);
  CHECK(report.rate <= report.ci_high);
  // The guess always lands on some honest node of prior mass 1/3.
  CHECK(report.bound == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.bound_satisfied);
}

TEST_CASE("likelihood attack stays within the leakage bound") {
  const Graph g = named_graph("complete", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const double epsilon = exact_epsilon(build_chain(g, F, 0.0)).epsilon;
  CHECK(epsilon == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  AttackOptions opts;
  opts.epsilon = epsilon;
  opts.likelihood_trials = 2000;
  const AttackReport report =
      attack_success_rate(g, F, {ProtocolKind::random_walk, 0.0, 0}, AttackKind::mle,
                          uniform_prior(g, F), 10000, 71, opts);

  CHECK(report.conditioned_trials == 10000);
  CHECK(report.bound == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.bound_satisfied);
  // The informed guess does beat blind guessing.
  CHECK(report.rate > 1.0 / 3.0 + 0.05);
  CHECK(report.rate < 2.0 / 3.0);
}

TEST_CASE("posterior weight concentrates the attack on the prior support") {
  const Graph g = named_graph("cycle", 8);
  const CuriousSet F = make_curious_set(g, {0, 4});

  // Sources 2 and 6 sit on opposite sides of the curious cut; their views
  // never mix, so the map attack identifies the side almost surely.
  Prior two_sided = uniform_prior(g, F);
  for (std::size_t i = 0; i < two_sided.nodes.size(); ++i) {
    two_sided.weights[i] = (two_sided.nodes[i] == 2 || two_sided.nodes[i] == 6) ? 0.5 : 0.0;
  }
  AttackOptions opts;
  opts.likelihood_trials = 4000;
  const AttackReport report =
      attack_success_rate(g, F, {ProtocolKind::random_walk, 0.0, 0}, AttackKind::map, two_sided,
                          400, 83, opts);
  CHECK(report.conditioned_trials == 400);
  CHECK(report.rate > 0.95);
  // No epsilon supplied: the bound reports as infinite and holds vacuously.
  CHECK(std::isinf(report.bound));
  CHECK(report.bound_satisfied);
}

TEST_CASE("attack reports serialize with stable keys") {
  const Graph g = named_graph("cycle", 4);
  const CuriousSet F = make_curious_set(g, {3});
  const AttackReport report =
      attack_success_rate(g, F, {ProtocolKind::random_walk, 0.0, 0}, AttackKind::first_contact,
                          uniform_prior(g, F), 50, 5);
  const auto j = attack_report_json(report);

  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"attack", "trials", "conditioned_trials", "successes",
                                         "rate", "ci_low", "ci_high", "bound",
                                         "bound_satisfied"});
  CHECK(j["attack"] == "first_contact");
  CHECK(j["trials"] == 50);
  CHECK(j["bound"] == "inf");
  CHECK(j["bound_satisfied"] == true);

  CHECK_THROWS_AS(attack_success_rate(g, F, {ProtocolKind::random_walk, 0.0, 0},
                                      AttackKind::first_contact, uniform_prior(g, F), 0, 5),
                  std::invalid_argument);
}
