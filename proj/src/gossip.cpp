#include "sag/gossip.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>

#include "sag/rng.hpp"

#include "json.hpp"

namespace sag {

ProtocolKind protocol_kind_from_string(const std::string& name) {
  if (name == "random_walk") return ProtocolKind::random_walk;
  if (name == "cobra") return ProtocolKind::cobra;
  if (name == "dandelion") return ProtocolKind::dandelion;
  if (name == "muting_push") return ProtocolKind::muting_push;
  if (name == "two_cobra") return ProtocolKind::two_cobra;
  if (name == "die_out_walk") return ProtocolKind::die_out_walk;
  if (name == "anaconda") return ProtocolKind::anaconda;
  throw std::invalid_argument("protocol_kind_from_string: unknown protocol '" + name + "'");
}

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::random_walk: return "random_walk";
    case ProtocolKind::cobra: return "cobra";
    case ProtocolKind::dandelion: return "dandelion";
    case ProtocolKind::muting_push: return "muting_push";
    case ProtocolKind::two_cobra: return "two_cobra";
    case ProtocolKind::die_out_walk: return "die_out_walk";
    case ProtocolKind::anaconda: return "anaconda";
  }
  throw std::invalid_argument("to_string: unknown protocol kind");
}

double effective_rho(const ProtocolSpec& spec) {
  if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) {
    throw std::invalid_argument("effective_rho: rho must lie in [0, 1]");
  }
  switch (spec.kind) {
    case ProtocolKind::random_walk: return 0.0;
    case ProtocolKind::two_cobra: return 1.0;
    default: return spec.rho;
  }
}

long long default_horizon(int n) {
  const double scale = std::max(n, 2);
  return static_cast<long long>(std::ceil(100.0 * scale * std::log(scale)));
}

int Execution::coverage_time() const {
  int worst = 0;
  for (int round : informed_by) worst = std::max(worst, round);
  return worst;
}

namespace {

// One protocol run shares this state across rounds.
struct EngineState {
  bool anon = true;       // dandelion phase token, frozen once down
  int head = 0;           // anaconda branching walker
  int branches_used = 0;  // anaconda budget spent
  bool walker_dead = false;
};

int uniform_neighbor(const Graph& g, int u, std::mt19937_64& rng) {
  const auto& nbrs = g.adjacency[u];
  if (nbrs.empty()) throw std::runtime_error("simulate: node " + std::to_string(u) + " has no neighbors");
  std::uniform_int_distribution<int> pick(0, static_cast<int>(nbrs.size()) - 1);
  return nbrs[pick(rng)];
}

// Produces one round of communications from the sorted active set, mutating
// the cross-round state. Nodes act in ascending id order so a fixed seed
// fixes the whole execution.
std::vector<std::pair<int, int>> run_round(const Graph& g, const ProtocolSpec& spec, double rho,
                                           const std::vector<int>& active,
                                           const std::vector<char>& curious, EngineState& state,
                                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<int, int>> comms;

  switch (spec.kind) {
    case ProtocolKind::random_walk:
    case ProtocolKind::cobra:
    case ProtocolKind::two_cobra: {
      for (int u : active) {
        const int copies = unit(rng) < rho ? 2 : 1;
        for (int c = 0; c < copies; ++c) comms.emplace_back(u, uniform_neighbor(g, u, rng));
      }
      break;
    }
    case ProtocolKind::dandelion: {
      // The phase token may drop at the start of any round, including the
      // very first; the same round then already spreads.
      if (state.anon && unit(rng) < rho) state.anon = false;
      if (state.anon) {
        const int u = active.front();
        comms.emplace_back(u, uniform_neighbor(g, u, rng));
      } else {
        for (int u : active) {
          for (int v : g.adjacency[u]) comms.emplace_back(u, v);
        }
      }
      break;
    }
    case ProtocolKind::muting_push: {
      for (int u : active) {
        comms.emplace_back(u, uniform_neighbor(g, u, rng));
        // Staying active is a real communication: the node messages itself.
        if (unit(rng) < rho) comms.emplace_back(u, u);
      }
      break;
    }
    case ProtocolKind::die_out_walk: {
      const int u = active.front();
      if (unit(rng) < rho) {
        state.walker_dead = true;  // dies in place, no communication
        break;
      }
      const int v = uniform_neighbor(g, u, rng);
      comms.emplace_back(u, v);
      if (curious[v]) state.walker_dead = true;  // absorbed at the sender
      break;
    }
    case ProtocolKind::anaconda: {
      for (int u : active) {
        if (u == state.head) {
          const bool branch = state.branches_used < spec.b && unit(rng) < rho;
          if (branch) {
            ++state.branches_used;
            const int first = uniform_neighbor(g, u, rng);
            const int second = uniform_neighbor(g, u, rng);
            comms.emplace_back(u, first);
            comms.emplace_back(u, second);
            state.head = first;  // the first copy carries the head onward
          } else {
            const int v = uniform_neighbor(g, u, rng);
            comms.emplace_back(u, v);
            state.head = v;
          }
        } else {
          comms.emplace_back(u, uniform_neighbor(g, u, rng));
        }
      }
      break;
    }
  }

  std::sort(comms.begin(), comms.end());
  return comms;
}

std::vector<int> receivers_of(const std::vector<std::pair<int, int>>& comms) {
  std::vector<int> receivers;
  receivers.reserve(comms.size());
  for (const auto& [from, to] : comms) receivers.push_back(to);
  std::sort(receivers.begin(), receivers.end());
  receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
  return receivers;
}

}  // namespace

Execution simulate(const Graph& g, const ProtocolSpec& spec, int source, long long horizon,
                   std::uint64_t seed, const CuriousSet* curious) {
  if (source < 0 || source >= g.n) throw std::invalid_argument("simulate: source out of range");
  if (horizon < 1) throw std::invalid_argument("simulate: horizon must be at least 1");
  if (spec.kind == ProtocolKind::anaconda && spec.b < 0) {
    throw std::invalid_argument("simulate: anaconda branch budget must be nonnegative");
  }
  const double rho = effective_rho(spec);
  auto rng = rng_for(seed, 0);

  std::vector<char> curious_mask(g.n, 0);
  if (curious) {
    for (int v : curious->members) curious_mask[v] = 1;
  }

  Execution exec;
  exec.source = source;
  exec.t_star = 0;
  exec.informed_by.assign(g.n, kNeverInformed);
  exec.informed_by[source] = 0;
  int informed = 1;

  EngineState state;
  state.head = source;
  std::vector<int> active = {source};

  for (long long t = 0; t < horizon; ++t) {
    Round round;
    round.active = active;
    round.comms = run_round(g, spec, rho, active, curious_mask, state, rng);
    round.anon_phase = spec.kind == ProtocolKind::dandelion ? state.anon : true;

    active = receivers_of(round.comms);
    exec.rounds.push_back(std::move(round));

    for (int v : active) {
      if (exec.informed_by[v] == kNeverInformed) {
        exec.informed_by[v] = static_cast<int>(t) + 1;
        ++informed;
      }
    }
    if (informed == g.n) {
      exec.covered = true;
      break;
    }
    if (state.walker_dead || active.empty()) break;
  }
  return exec;
}

DisseminationStats dissemination_time(const Graph& g, const ProtocolSpec& spec, int source,
                                      int trials, std::uint64_t seed, long long horizon) {
  if (trials < 1) throw std::invalid_argument("dissemination_time: trials must be at least 1");
  if (horizon <= 0) horizon = default_horizon(g.n);

  DisseminationStats stats;
  stats.trials = trials;
  std::vector<double> times;
  times.reserve(trials);
  for (int trial = 0; trial < trials; ++trial) {
    const Execution exec =
        simulate(g, spec, source, horizon, mix_seed(seed, static_cast<std::uint64_t>(trial)));
    if (!exec.covered) {
      ++stats.censored;
      continue;
    }
    times.push_back(static_cast<double>(exec.coverage_time()));
  }
  if (stats.censored > 0) {
    std::cerr << "dissemination_time: " << stats.censored << " of " << trials
              << " trials hit the horizon and were excluded from the moments\n";
  }
  if (!times.empty()) {
    stats.mean = mean_of(times);
    stats.stddev = stddev_of(times);
    stats.p50 = quantile_of(times, 0.50);
    stats.p90 = quantile_of(times, 0.90);
    stats.p99 = quantile_of(times, 0.99);
  }
  return stats;
}

int die_out_death_site(const Graph& g, const CuriousSet& F, double rho, int source,
                       std::mt19937_64& rng) {
  if (source < 0 || source >= g.n || F.contains(source)) {
    throw std::invalid_argument("die_out_death_site: source must be a non-curious node");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("die_out_death_site: rho must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int current = source;
  for (;;) {
    if (unit(rng) < rho) return current;
    const int next = uniform_neighbor(g, current, rng);
    if (F.contains(next)) return current;
    current = next;
  }
}

int die_out_death_site(const Graph& g, const CuriousSet& F, double rho, int source,
                       std::uint64_t seed) {
  auto rng = rng_for(seed, 0);
  return die_out_death_site(g, F, rho, source, rng);
}

PassageEstimate passage_probability(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                                    int u, int v, int trials, std::uint64_t seed,
                                    long long horizon) {
  switch (spec.kind) {
    case ProtocolKind::random_walk:
    case ProtocolKind::cobra:
    case ProtocolKind::two_cobra:
    case ProtocolKind::dandelion:
    case ProtocolKind::anaconda:
      break;
    default:
      throw std::invalid_argument("passage_probability: unsupported protocol '" +
                                  to_string(spec.kind) + "'");
  }
  if (u < 0 || u >= g.n || v < 0 || v >= g.n || F.contains(u) || F.contains(v)) {
    throw std::invalid_argument("passage_probability: endpoints must be non-curious nodes");
  }
  if (trials < 1) throw std::invalid_argument("passage_probability: trials must be at least 1");
  if (horizon <= 0) horizon = default_horizon(g.n);
  const double rho = effective_rho(spec);

  std::vector<char> curious_mask(g.n, 0);
  for (int w : F.members) curious_mask[w] = 1;

  long long successes = 0;
  for (int trial = 0; trial < trials; ++trial) {
    auto rng = rng_for(seed, static_cast<std::uint64_t>(trial));
    EngineState state;
    state.head = u;
    std::vector<int> active = {u};

    for (long long t = 0; t < horizon; ++t) {
      // The success event is judged on the pre-round state: the active set
      // collapsed onto v with the phase token still up and no prior curious
      // contact; t = 0 with u = v counts.
      if (active.size() == 1 && active.front() == v && state.anon) {
        ++successes;
        break;
      }
      bool touched = false;
      for (int w : active) touched = touched || curious_mask[w];
      if (touched) break;
      if (spec.kind == ProtocolKind::dandelion && !state.anon) break;

      active = receivers_of(run_round(g, spec, rho, active, curious_mask, state, rng));
      if (active.empty()) break;
    }
  }

  PassageEstimate estimate;
  estimate.successes = successes;
  estimate.trials = trials;
  estimate.estimate = static_cast<double>(successes) / trials;
  const Interval ci = wilson_interval(successes, trials);
  estimate.ci_low = ci.lo;
  estimate.ci_high = ci.hi;
  return estimate;
}

void write_trace(const Execution& exec, std::ostream& out) {
  for (std::size_t t = 0; t < exec.rounds.size(); ++t) {
    const Round& round = exec.rounds[t];
    nlohmann::ordered_json line;
    line["t"] = t;
    line["active"] = round.active;
    auto comms = nlohmann::ordered_json::array();
    for (const auto& [from, to] : round.comms) {
      comms.push_back({from, to});
    }
    line["comms"] = std::move(comms);
    line["anon"] = round.anon_phase;
    out << line.dump() << "\n";
  }
}

}  // namespace sag
