#include "sag/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sag/rng.hpp"

namespace sag {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::vector<int> honest_nodes(const Graph& g, const CuriousSet& F) {
  std::vector<char> curious(g.n, 0);
  for (int v : F.members) curious[v] = 1;
  std::vector<int> nodes;
  nodes.reserve(g.n - F.f());
  for (int v = 0; v < g.n; ++v) {
    if (!curious[v]) nodes.push_back(v);
  }
  return nodes;
}

void validate_prior(const Graph& g, const CuriousSet& F, const Prior& prior) {
  if (prior.nodes != honest_nodes(g, F)) {
    throw std::invalid_argument("prior: nodes must be exactly the non-curious nodes, ascending");
  }
  if (prior.weights.size() != prior.nodes.size()) {
    throw std::invalid_argument("prior: weights must align with nodes");
  }
  double total = 0.0;
  for (double w : prior.weights) {
    if (w < 0.0) throw std::invalid_argument("prior: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("prior: weights must sum to 1");
  }
}

// Connected components of g with the given nodes removed.
std::vector<std::vector<int>> components_without(const Graph& g, const std::vector<char>& removed) {
  std::vector<std::vector<int>> components;
  std::vector<char> seen(g.n, 0);
  for (int start = 0; start < g.n; ++start) {
    if (removed[start] || seen[start]) continue;
    std::vector<int> component;
    std::deque<int> frontier = {start};
    seen[start] = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop_front();
      component.push_back(v);
      for (int u : g.adjacency[v]) {
        if (!removed[u] && !seen[u]) {
          seen[u] = 1;
          frontier.push_back(u);
        }
      }
    }
    components.push_back(std::move(component));
  }
  return components;
}

CuriousSet select_uniform(const Graph& g, int f, std::mt19937_64& rng) {
  std::vector<int> ids(g.n);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  return make_curious_set(g, {ids.begin(), ids.begin() + f});
}

CuriousSet select_greedy_density(const Graph& g, int f) {
  if (!g.degree_uniform) {
    throw std::invalid_argument("select_curious: greedy_density needs a regular graph");
  }
  std::vector<char> chosen(g.n, 0);
  std::vector<int> curious_neighbors(g.n, 0);
  std::vector<int> members;
  for (int round = 0; round < f; ++round) {
    int best = -1;
    int best_density = -1;
    for (int candidate = 0; candidate < g.n; ++candidate) {
      if (chosen[candidate]) continue;
      // Density if we add the candidate: the worst honest neighborhood,
      // where the candidate's own neighbors each gain one curious contact.
      int density = 0;
      for (int w = 0; w < g.n; ++w) {
        if (chosen[w] || w == candidate) continue;
        const int count = curious_neighbors[w] + (g.has_edge(candidate, w) ? 1 : 0);
        density = std::max(density, count);
      }
      if (density > best_density) {
        best_density = density;
        best = candidate;
      }
    }
    chosen[best] = 1;
    members.push_back(best);
    for (int u : g.adjacency[best]) ++curious_neighbors[u];
  }
  return make_curious_set(g, std::move(members));
}

CuriousSet select_min_vertex_cut(const Graph& g, int f, std::mt19937_64& rng,
                                 const SelectOptions& opts) {
  const std::vector<int> cut = min_vertex_cut(g, opts.connectivity_cap);
  if (f < static_cast<int>(cut.size())) {
    throw std::invalid_argument(
        "select_curious: f is smaller than the minimum vertex cut, infeasible");
  }

  std::vector<char> chosen(g.n, 0);
  for (int v : cut) chosen[v] = 1;
  auto components = components_without(g, chosen);

  // Padding must keep at least one honest node on every side of the cut.
  int capacity = 0;
  for (const auto& component : components) {
    capacity += static_cast<int>(component.size()) - 1;
  }
  int remaining = f - static_cast<int>(cut.size());
  if (remaining > capacity) {
    throw std::invalid_argument(
        "select_curious: f exceeds the honest capacity left by the vertex cut, infeasible");
  }

  std::vector<int> component_of(g.n, -1);
  std::vector<int> honest_left(components.size(), 0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    honest_left[c] = static_cast<int>(components[c].size());
    for (int v : components[c]) component_of[v] = static_cast<int>(c);
  }

  std::vector<int> candidates;
  for (int v = 0; v < g.n; ++v) {
    if (!chosen[v]) candidates.push_back(v);
  }
  if (opts.padding == CutPadding::uniform_random) {
    std::shuffle(candidates.begin(), candidates.end(), rng);
  }
  std::vector<int> members = cut;
  for (int v : candidates) {
    if (remaining == 0) break;
    if (honest_left[component_of[v]] <= 1) continue;
    members.push_back(v);
    --honest_left[component_of[v]];
    --remaining;
  }
  return make_curious_set(g, std::move(members));
}

}  // namespace

SelectionMode selection_mode_from_string(const std::string& name) {
  if (name == "uniform") return SelectionMode::uniform;
  if (name == "min_vertex_cut") return SelectionMode::min_vertex_cut;
  if (name == "greedy_density") return SelectionMode::greedy_density;
  throw std::invalid_argument("selection_mode_from_string: unknown mode '" + name + "'");
}

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::uniform: return "uniform";
    case SelectionMode::min_vertex_cut: return "min_vertex_cut";
    case SelectionMode::greedy_density: return "greedy_density";
  }
  throw std::invalid_argument("to_string: unknown selection mode");
}

CuriousSet select_curious(const Graph& g, int f, SelectionMode mode, std::uint64_t seed,
                          const SelectOptions& opts) {
  if (f <= 0 || f >= g.n - 1) {
    throw std::invalid_argument("select_curious: need 0 < f < n - 1");
  }
  auto rng = rng_for(seed, 0);
  switch (mode) {
    case SelectionMode::uniform: return select_uniform(g, f, rng);
    case SelectionMode::min_vertex_cut: return select_min_vertex_cut(g, f, rng, opts);
    case SelectionMode::greedy_density: return select_greedy_density(g, f);
  }
  throw std::invalid_argument("select_curious: unknown mode");
}

AdversaryView observe(const Execution& exec, const CuriousSet& F) {
  AdversaryView view;
  view.curious = F.members;
  std::sort(view.curious.begin(), view.curious.end());
  for (const Round& round : exec.rounds) {
    ViewEntry entry;
    entry.anon_phase = round.anon_phase;
    for (const auto& comm : round.comms) {
      if (F.contains(comm.first) || F.contains(comm.second)) entry.comms.push_back(comm);
    }
    if (view.observations.empty() && entry.comms.empty()) continue;
    view.observations.push_back(std::move(entry));
  }
  return view;
}

double Prior::weight_of(int node) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node) return 0.0;
  return weights[static_cast<std::size_t>(it - nodes.begin())];
}

Prior uniform_prior(const Graph& g, const CuriousSet& F) {
  Prior prior;
  prior.nodes = honest_nodes(g, F);
  prior.weights.assign(prior.nodes.size(), 1.0 / static_cast<double>(prior.nodes.size()));
  return prior;
}

Prior point_prior(const Graph& g, const CuriousSet& F, int node) {
  Prior prior;
  prior.nodes = honest_nodes(g, F);
  prior.weights.assign(prior.nodes.size(), 0.0);
  const auto it = std::lower_bound(prior.nodes.begin(), prior.nodes.end(), node);
  if (it == prior.nodes.end() || *it != node) {
    throw std::invalid_argument("point_prior: node must be non-curious");
  }
  prior.weights[static_cast<std::size_t>(it - prior.nodes.begin())] = 1.0;
  return prior;
}

int first_contact_attack(const AdversaryView& view) {
  if (view.empty()) return kAbstain;
  const auto is_curious = [&](int v) {
    return std::binary_search(view.curious.begin(), view.curious.end(), v);
  };
  int guess = kAbstain;
  for (const auto& [from, to] : view.observations.front().comms) {
    if (is_curious(from) || !is_curious(to)) continue;
    if (guess == kAbstain || from < guess) guess = from;
  }
  return guess;
}

namespace {

// Canonical string for the first k observed entries; the truncated sequence
// length is part of the event, so shorter views match only shorter views.
std::string prefix_key(const AdversaryView& view, int prefix_length) {
  std::ostringstream key;
  const std::size_t take =
      std::min<std::size_t>(view.observations.size(), static_cast<std::size_t>(prefix_length));
  for (std::size_t i = 0; i < take; ++i) {
    const ViewEntry& entry = view.observations[i];
    for (const auto& [from, to] : entry.comms) key << from << '>' << to << ',';
    key << '|' << (entry.anon_phase ? 1 : 0) << ';';
  }
  return key.str();
}

// Per-candidate histograms of observation prefixes, the Monte Carlo
// likelihood table shared by every guess of one invocation.
struct LikelihoodModel {
  std::vector<int> candidates;
  std::vector<std::unordered_map<std::string, int>> counts;
  int trials = 0;
  int prefix_length = 1;
};

LikelihoodModel build_likelihood_model(const Graph& g, const CuriousSet& F,
                                       const ProtocolSpec& spec, int prefix_length, int trials,
                                       std::uint64_t seed, long long horizon) {
  if (trials < 1) {
    throw std::invalid_argument("likelihood model: trials must be at least 1");
  }
  if (prefix_length < 1) {
    throw std::invalid_argument("likelihood model: prefix length must be at least 1");
  }
  if (horizon <= 0) horizon = default_horizon(g.n);
  LikelihoodModel model;
  model.candidates = honest_nodes(g, F);
  model.counts.resize(model.candidates.size());
  model.trials = trials;
  model.prefix_length = prefix_length;
  for (std::size_t c = 0; c < model.candidates.size(); ++c) {
    for (int trial = 0; trial < trials; ++trial) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(trials) +
          static_cast<std::uint64_t>(trial);
      const Execution exec =
          simulate(g, spec, model.candidates[c], horizon, mix_seed(seed, stream), &F);
      const AdversaryView sample = observe(exec, F);
      if (sample.empty()) continue;
      ++model.counts[c][prefix_key(sample, prefix_length)];
    }
  }
  return model;
}

MapResult guess_from_model(const LikelihoodModel& model, const Prior& prior,
                           const AdversaryView& view) {
  const std::string key = prefix_key(view, model.prefix_length);
  MapResult result;
  double best = 0.0;
  for (std::size_t c = 0; c < model.candidates.size(); ++c) {
    const auto hit = model.counts[c].find(key);
    if (hit == model.counts[c].end()) continue;
    const double score = static_cast<double>(hit->second) / model.trials *
                         prior.weights[c];
    if (score > best) {
      best = score;
      result.guess = model.candidates[c];
    }
  }
  if (best <= 0.0) {
    result.guess = first_contact_attack(view);
    result.fallback_first_contact = true;
  }
  return result;
}

}  // namespace

MapResult map_attack(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                     const Prior& prior, const AdversaryView& view, int likelihood_trials,
                     std::uint64_t seed, int prefix_length) {
  if (view.empty()) throw std::invalid_argument("map_attack: view must be non-empty");
  validate_prior(g, F, prior);
  const LikelihoodModel model =
      build_likelihood_model(g, F, spec, prefix_length, likelihood_trials, seed, 0);
  return guess_from_model(model, prior, view);
}

MapResult mle_attack(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                     const AdversaryView& view, int likelihood_trials, std::uint64_t seed,
                     int prefix_length) {
  return map_attack(g, F, spec, uniform_prior(g, F), view, likelihood_trials, seed, prefix_length);
}

AttackKind attack_kind_from_string(const std::string& name) {
  if (name == "first_contact") return AttackKind::first_contact;
  if (name == "mle") return AttackKind::mle;
  if (name == "map") return AttackKind::map;
  throw std::invalid_argument("attack_kind_from_string: unknown attack '" + name + "'");
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::first_contact: return "first_contact";
    case AttackKind::mle: return "mle";
    case AttackKind::map: return "map";
  }
  throw std::invalid_argument("to_string: unknown attack kind");
}

AttackReport attack_success_rate(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                                 AttackKind attack, const Prior& source_sampler, int trials,
                                 std::uint64_t seed, const AttackOptions& opts) {
  if (trials < 1) throw std::invalid_argument("attack_success_rate: trials must be at least 1");
  validate_prior(g, F, source_sampler);
  const long long horizon = opts.horizon > 0 ? opts.horizon : default_horizon(g.n);

  // The likelihood table and the per-prefix guess are observation-dependent
  // only, so one model and one cache serve all trials of this invocation.
  std::optional<LikelihoodModel> model;
  if (attack != AttackKind::first_contact) {
    model = build_likelihood_model(g, F, spec, opts.prefix_length, opts.likelihood_trials,
                                   mix_seed(seed, 0x6c696b656cULL), horizon);
  }
  Prior mle_prior;
  if (attack == AttackKind::mle) mle_prior = uniform_prior(g, F);
  const Prior& attack_prior = attack == AttackKind::map ? source_sampler : mle_prior;
  std::unordered_map<std::string, MapResult> guess_cache;

  AttackReport report;
  report.attack = attack;
  report.trials = trials;
  double guessed_prior_mass = 0.0;

  std::discrete_distribution<int> source_pick(source_sampler.weights.begin(),
                                              source_sampler.weights.end());
  for (int trial = 0; trial < trials; ++trial) {
    auto rng = rng_for(seed, static_cast<std::uint64_t>(trial));
    const int source = source_sampler.nodes[source_pick(rng)];
    const Execution exec = simulate(g, spec, source, horizon, rng(), &F);
    const AdversaryView view = observe(exec, F);
    if (view.empty()) continue;
    ++report.conditioned_trials;

    int guess = kAbstain;
    if (attack == AttackKind::first_contact) {
      guess = first_contact_attack(view);
    } else {
      const std::string key = prefix_key(view, opts.prefix_length);
      auto cached = guess_cache.find(key);
      if (cached == guess_cache.end()) {
        cached = guess_cache.emplace(key, guess_from_model(*model, attack_prior, view)).first;
      }
      if (cached->second.fallback_first_contact) report.fallback_used = true;
      guess = cached->second.guess;
    }
    if (guess != kAbstain) guessed_prior_mass += source_sampler.weight_of(guess);
    if (guess == source) ++report.successes;
  }

  if (report.conditioned_trials > 0) {
    report.rate = static_cast<double>(report.successes) / report.conditioned_trials;
    const Interval ci = wilson_interval(report.successes, report.conditioned_trials);
    report.ci_low = ci.lo;
    report.ci_high = ci.hi;
  }
  if (opts.epsilon) {
    const double scale = std::exp(*opts.epsilon);
    if (attack == AttackKind::mle) {
      report.bound = scale / static_cast<double>(g.n - F.f());
    } else {
      const double mean_mass = report.conditioned_trials > 0
                                   ? guessed_prior_mass / report.conditioned_trials
                                   : 0.0;
      report.bound = scale * mean_mass;
    }
  } else {
    report.bound = kInfinity;
  }
  report.bound_satisfied = report.rate <= report.bound + 1e-12;
  return report;
}

nlohmann::ordered_json attack_report_json(const AttackReport& report) {
  nlohmann::ordered_json j;
  j["attack"] = to_string(report.attack);
  j["trials"] = report.trials;
  j["conditioned_trials"] = report.conditioned_trials;
  j["successes"] = report.successes;
  j["rate"] = report.rate;
  j["ci_low"] = report.ci_low;
  j["ci_high"] = report.ci_high;
  if (std::isinf(report.bound)) {
    j["bound"] = "inf";
  } else {
    j["bound"] = report.bound;
  }
  j["bound_satisfied"] = report.bound_satisfied;
  return j;
}

}  // namespace sag
