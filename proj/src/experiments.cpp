#include "sag/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "sag/rng.hpp"
#include "sag/spectral.hpp"

namespace sag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_keys(const nlohmann::json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) {
      throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

ExperimentConfig parse_impl(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be a JSON object");
  }
  check_keys(j, "the top level",
             {"graph", "protocols", "adversary", "attack", "sweep", "trials", "horizon", "seed",
              "output"});

  ExperimentConfig cfg;

  const auto& jg = j.at("graph");
  if (!jg.is_object() || jg.size() != 1) {
    throw std::invalid_argument("config: graph needs exactly one of generate, named, file");
  }
  check_keys(jg, "graph", {"generate", "named", "file"});
  if (jg.contains("generate")) {
    const auto& js = jg.at("generate");
    check_keys(js, "graph.generate", {"n", "d"});
    cfg.graph.kind = GraphSource::Kind::generate;
    cfg.graph.n = js.at("n").get<int>();
    cfg.graph.d = js.at("d").get<int>();
    if (cfg.graph.n < 2 || cfg.graph.d < 1) {
      throw std::invalid_argument("config: graph.generate needs n >= 2 and d >= 1");
    }
  } else if (jg.contains("named")) {
    const auto& js = jg.at("named");
    check_keys(js, "graph.named", {"kind", "n"});
    cfg.graph.kind = GraphSource::Kind::named;
    cfg.graph.name = js.at("kind").get<std::string>();
    cfg.graph.n = js.at("n").get<int>();
  } else {
    cfg.graph.kind = GraphSource::Kind::file;
    cfg.graph.name = jg.at("file").get<std::string>();
    if (cfg.graph.name.empty()) {
      throw std::invalid_argument("config: graph.file must be a nonempty path");
    }
  }

  const auto& jp = j.at("protocols");
  if (!jp.is_array() || jp.empty()) {
    throw std::invalid_argument("config: protocols must be a nonempty array");
  }
  for (const auto& item : jp) {
    check_keys(item, "protocols[]", {"kind", "rho", "b"});
    ProtocolSpec spec;
    spec.kind = protocol_kind_from_string(item.at("kind").get<std::string>());
    spec.rho = item.value("rho", 0.0);
    spec.b = item.value("b", 0);
    if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) {
      throw std::invalid_argument("config: protocol rho must lie in [0, 1]");
    }
    if (spec.b < 0) {
      throw std::invalid_argument("config: protocol b must be nonnegative");
    }
    cfg.protocols.push_back(spec);
  }

  if (j.contains("adversary")) {
    const auto& ja = j.at("adversary");
    check_keys(ja, "adversary", {"mode", "selection", "f", "members"});
    if (ja.contains("mode")) {
      cfg.adversary.mode = adversary_mode_from_string(ja.at("mode").get<std::string>());
    }
    if (ja.contains("selection")) {
      cfg.adversary.selection = selection_mode_from_string(ja.at("selection").get<std::string>());
    }
    if (ja.contains("members")) {
      cfg.adversary.members = ja.at("members").get<std::vector<int>>();
      if (cfg.adversary.members.empty()) {
        throw std::invalid_argument("config: adversary.members must be nonempty when present");
      }
      cfg.adversary.f = static_cast<int>(cfg.adversary.members.size());
      if (ja.contains("f") && ja.at("f").get<int>() != cfg.adversary.f) {
        throw std::invalid_argument("config: adversary.f contradicts adversary.members");
      }
    } else if (ja.contains("f")) {
      cfg.adversary.f = ja.at("f").get<int>();
    }
    if (cfg.adversary.f < 1) {
      throw std::invalid_argument("config: adversary.f must be at least 1");
    }
  }

  if (j.contains("attack")) {
    const auto& ja = j.at("attack");
    check_keys(ja, "attack",
               {"kind", "trials", "prefix_length", "likelihood_trials", "bound_from_exact"});
    if (ja.contains("kind")) {
      cfg.attack.kind = attack_kind_from_string(ja.at("kind").get<std::string>());
    }
    cfg.attack.trials = ja.value("trials", 0);
    cfg.attack.prefix_length = ja.value("prefix_length", 1);
    cfg.attack.likelihood_trials = ja.value("likelihood_trials", 2000);
    cfg.attack.bound_from_exact = ja.value("bound_from_exact", true);
    if (cfg.attack.trials < 0) {
      throw std::invalid_argument("config: attack.trials must be nonnegative");
    }
    if (cfg.attack.prefix_length < 1 || cfg.attack.likelihood_trials < 1) {
      throw std::invalid_argument(
          "config: attack.prefix_length and attack.likelihood_trials must be at least 1");
    }
  }

  if (j.contains("sweep")) {
    const auto& js = j.at("sweep");
    check_keys(js, "sweep", {"n", "d", "f", "rho"});
    cfg.n_axis = js.value("n", std::vector<int>{});
    cfg.d_axis = js.value("d", std::vector<int>{});
    cfg.f_axis = js.value("f", std::vector<int>{});
    cfg.rho_axis = js.value("rho", std::vector<double>{});
    if ((!cfg.n_axis.empty() || !cfg.d_axis.empty()) &&
        cfg.graph.kind != GraphSource::Kind::generate) {
      throw std::invalid_argument("config: n and d axes apply only to generated graphs");
    }
    for (int v : cfg.n_axis) {
      if (v < 2) throw std::invalid_argument("config: sweep.n values must be at least 2");
    }
    for (int v : cfg.d_axis) {
      if (v < 1) throw std::invalid_argument("config: sweep.d values must be at least 1");
    }
    for (int v : cfg.f_axis) {
      if (v < 1) throw std::invalid_argument("config: sweep.f values must be at least 1");
    }
    if (!cfg.f_axis.empty() && !cfg.adversary.members.empty()) {
      throw std::invalid_argument("config: sweep.f conflicts with an explicit curious set");
    }
    for (double v : cfg.rho_axis) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("config: sweep.rho values must lie in [0, 1]");
      }
    }
  }

  cfg.trials = j.value("trials", 1000);
  if (cfg.trials < 1) {
    throw std::invalid_argument("config: trials must be at least 1");
  }
  cfg.horizon = j.value("horizon", static_cast<long long>(0));
  if (cfg.horizon < 0) {
    throw std::invalid_argument("config: horizon must be nonnegative");
  }
  if (!j.contains("seed")) {
    throw std::invalid_argument("config: seed is required");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("output")) {
    const auto& jo = j.at("output");
    check_keys(jo, "output", {"csv", "json"});
    cfg.csv_path = jo.value("csv", std::string{});
    cfg.json_path = jo.value("json", std::string{});
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  try {
    return parse_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

namespace {

struct SweepPoint {
  int n = 0;
  int d = 0;
  int f = 0;
  double rho = -1.0;  // negative = keep the protocol's configured rho
  ProtocolSpec spec;
  std::size_t index = 0;
};

std::string sanitize_status(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

SweepRecord blank_record(const ExperimentConfig& cfg, const SweepPoint& pt) {
  SweepRecord rec;
  rec.n = pt.n;
  rec.d = pt.d;
  rec.f = pt.f;
  rec.rho = pt.rho >= 0.0 ? pt.rho : pt.spec.rho;
  rec.protocol = to_string(pt.spec.kind);
  rec.mode = to_string(cfg.adversary.mode);
  rec.lambda = kNaN;
  rec.epsilon_exact = kNaN;
  rec.epsilon_upper = kNaN;
  rec.epsilon_lower = kNaN;
  rec.alpha_used = kNaN;
  rec.lemma_c10_bound = kNaN;
  rec.mean_time = kNaN;
  rec.stddev_time = kNaN;
  rec.p50 = kNaN;
  rec.p90 = kNaN;
  rec.p99 = kNaN;
  rec.attack_rate = kNaN;
  rec.attack_ci_low = kNaN;
  rec.attack_ci_high = kNaN;
  rec.attack_bound = kNaN;
  return rec;
}

// One axis point: build or reuse the graph, pick the curious set, then run
// the privacy analysis, the dissemination trials, and the attack as
// independent stages. A stage failure lands in the status column and leaves
// that stage's columns NaN; the other stages still report.
SweepRecord run_point(const ExperimentConfig& cfg, const Graph* shared, const SweepPoint& pt) {
  SweepRecord rec = blank_record(cfg, pt);
  ProtocolSpec spec = pt.spec;
  spec.rho = rec.rho;

  const std::uint64_t graph_seed = mix_seed(cfg.seed, 4 * pt.index);
  const std::uint64_t select_seed = mix_seed(cfg.seed, 4 * pt.index + 1);
  const std::uint64_t diss_seed = mix_seed(cfg.seed, 4 * pt.index + 2);
  const std::uint64_t attack_seed = mix_seed(cfg.seed, 4 * pt.index + 3);

  Graph generated;
  const Graph* g = shared;
  try {
    if (g == nullptr) {
      generated = generate_random_regular(pt.n, pt.d, graph_seed);
      g = &generated;
    }
  } catch (const std::exception& e) {
    rec.status = sanitize_status(std::string("error: graph: ") + e.what());
    return rec;
  }
  rec.n = g->n;
  rec.d = g->degree_uniform.value_or(0);

  CuriousSet F;
  try {
    F = cfg.adversary.members.empty()
            ? select_curious(*g, pt.f, cfg.adversary.selection, select_seed)
            : make_curious_set(*g, cfg.adversary.members);
    rec.f = F.f();
  } catch (const std::exception& e) {
    rec.status = sanitize_status(std::string("error: curious set: ") + e.what());
    return rec;
  }

  std::vector<std::string> failures;
  std::optional<double> exact_for_bound;
  try {
    const PrivacyReport rep = analyze(*g, F, spec, cfg.adversary.mode);
    rec.lambda = rep.lambda;
    rec.gate_passed = rep.upper.has_value();
    rec.epsilon_exact = rep.epsilon_exact;
    if (rep.upper) rec.epsilon_upper = rep.upper->epsilon;
    rec.epsilon_lower = rep.lower.epsilon;
    rec.alpha_used = rep.alpha_used;
    if (rep.bound_at_true_density) rec.lemma_c10_bound = rep.bound_at_true_density->bound;
    if (std::isfinite(rep.epsilon_exact)) exact_for_bound = rep.epsilon_exact;
  } catch (const std::exception& e) {
    failures.push_back(std::string("privacy: ") + e.what());
  }

  try {
    int source = -1;
    for (int v = 0; v < g->n; ++v) {
      if (!F.contains(v)) {
        source = v;
        break;
      }
    }
    const DisseminationStats stats =
        dissemination_time(*g, spec, source, cfg.trials, diss_seed, cfg.horizon);
    rec.mean_time = stats.mean;
    rec.stddev_time = stats.stddev;
    rec.p50 = stats.p50;
    rec.p90 = stats.p90;
    rec.p99 = stats.p99;
    rec.censored = stats.censored;
  } catch (const std::exception& e) {
    failures.push_back(std::string("dissemination: ") + e.what());
  }

  if (cfg.attack.trials > 0) {
    try {
      AttackOptions opts;
      opts.prefix_length = cfg.attack.prefix_length;
      opts.likelihood_trials = cfg.attack.likelihood_trials;
      opts.horizon = cfg.horizon;
      if (cfg.attack.bound_from_exact) opts.epsilon = exact_for_bound;
      const AttackReport rep = attack_success_rate(*g, F, spec, cfg.attack.kind,
                                                   uniform_prior(*g, F), cfg.attack.trials,
                                                   attack_seed, opts);
      rec.attack_ran = true;
      rec.attack_rate = rep.rate;
      rec.attack_ci_low = rep.ci_low;
      rec.attack_ci_high = rep.ci_high;
      rec.attack_bound = rep.bound;
      rec.attack_bound_satisfied = rep.bound_satisfied;
    } catch (const std::exception& e) {
      failures.push_back(std::string("attack: ") + e.what());
    }
  }

  if (!failures.empty()) {
    std::string joined = "error: ";
    for (std::size_t i = 0; i < failures.size(); ++i) {
      if (i > 0) joined += "; ";
      joined += failures[i];
    }
    rec.status = sanitize_status(joined);
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
  std::shared_ptr<const Graph> shared;
  if (config.graph.kind == GraphSource::Kind::named) {
    try {
      shared = std::make_shared<const Graph>(named_graph(config.graph.name, config.graph.n));
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("config: graph: ") + e.what());
    }
  } else if (config.graph.kind == GraphSource::Kind::file) {
    try {
      shared = std::make_shared<const Graph>(load_edge_list(config.graph.name));
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("config: graph: ") + e.what());
    }
  }

  const std::vector<int> n_list =
      config.n_axis.empty() ? std::vector<int>{config.graph.n} : config.n_axis;
  const std::vector<int> d_list =
      config.d_axis.empty() ? std::vector<int>{config.graph.d} : config.d_axis;
  const int base_f = config.adversary.members.empty()
                         ? config.adversary.f
                         : static_cast<int>(config.adversary.members.size());
  const std::vector<int> f_list =
      config.f_axis.empty() ? std::vector<int>{base_f} : config.f_axis;
  const std::vector<double> rho_list =
      config.rho_axis.empty() ? std::vector<double>{-1.0} : config.rho_axis;

  std::vector<SweepPoint> points;
  for (int n : n_list) {
    for (int d : d_list) {
      for (int f : f_list) {
        for (double rho : rho_list) {
          for (const ProtocolSpec& spec : config.protocols) {
            SweepPoint pt;
            pt.n = n;
            pt.d = d;
            pt.f = f;
            pt.rho = rho;
            pt.spec = spec;
            pt.index = points.size();
            points.push_back(pt);
          }
        }
      }
    }
  }

  SweepResult result;
  result.records.resize(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) break;
      try {
        result.records[i] = run_point(config, shared.get(), points[i]);
      } catch (const std::exception& e) {
        result.records[i] = blank_record(config, points[i]);
        result.records[i].status = sanitize_status(std::string("error: ") + e.what());
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), points.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return result;
}

namespace {

std::string csv_num(double x) {
  if (std::isnan(x)) return {};
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

nlohmann::ordered_json json_num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "n,d,f,rho,protocol,mode,status,lambda,gate_passed,epsilon_exact,epsilon_upper,"
         "epsilon_lower,alpha_used,lemma_c10_bound,mean_time,stddev_time,p50,p90,p99,censored,"
         "attack_rate,attack_ci_low,attack_ci_high,attack_bound,attack_bound_satisfied\n";
  for (const SweepRecord& r : result.records) {
    out << r.n << ',' << r.d << ',' << r.f << ',' << csv_num(r.rho) << ',' << r.protocol << ','
        << r.mode << ',' << r.status << ',' << csv_num(r.lambda) << ','
        << (r.gate_passed ? "true" : "false") << ',' << csv_num(r.epsilon_exact) << ','
        << csv_num(r.epsilon_upper) << ',' << csv_num(r.epsilon_lower) << ','
        << csv_num(r.alpha_used) << ',' << csv_num(r.lemma_c10_bound) << ','
        << csv_num(r.mean_time) << ',' << csv_num(r.stddev_time) << ',' << csv_num(r.p50) << ','
        << csv_num(r.p90) << ',' << csv_num(r.p99) << ',' << r.censored << ','
        << csv_num(r.attack_rate) << ',' << csv_num(r.attack_ci_low) << ','
        << csv_num(r.attack_ci_high) << ',' << csv_num(r.attack_bound) << ','
        << (r.attack_ran ? (r.attack_bound_satisfied ? "true" : "false") : "") << '\n';
  }
}

nlohmann::ordered_json sweep_json(const SweepResult& result) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const SweepRecord& r : result.records) {
    nlohmann::ordered_json row;
    row["n"] = r.n;
    row["d"] = r.d;
    row["f"] = r.f;
    row["rho"] = json_num(r.rho);
    row["protocol"] = r.protocol;
    row["mode"] = r.mode;
    row["status"] = r.status;
    row["lambda"] = json_num(r.lambda);
    row["gate_passed"] = r.gate_passed;
    row["epsilon_exact"] = json_num(r.epsilon_exact);
    row["epsilon_upper"] = json_num(r.epsilon_upper);
    row["epsilon_lower"] = json_num(r.epsilon_lower);
    row["alpha_used"] = json_num(r.alpha_used);
    row["lemma_c10_bound"] = json_num(r.lemma_c10_bound);
    row["mean_time"] = json_num(r.mean_time);
    row["stddev_time"] = json_num(r.stddev_time);
    row["p50"] = json_num(r.p50);
    row["p90"] = json_num(r.p90);
    row["p99"] = json_num(r.p99);
    row["censored"] = r.censored;
    if (r.attack_ran) {
      nlohmann::ordered_json attack;
      attack["rate"] = json_num(r.attack_rate);
      attack["ci_low"] = json_num(r.attack_ci_low);
      attack["ci_high"] = json_num(r.attack_ci_high);
      attack["bound"] = json_num(r.attack_bound);
      attack["bound_satisfied"] = r.attack_bound_satisfied;
      row["attack"] = attack;
    } else {
      row["attack"] = nullptr;
    }
    records.push_back(std::move(row));
  }
  nlohmann::ordered_json j;
  j["records"] = std::move(records);
  return j;
}

namespace {

// Self-contained correctness audit: the randomized matrix-inequality suite
// plus fixed instances where the closed-form bound and the eigenvector
// containment are checked against exact linear algebra.
int run_audit(std::uint64_t seed, int trials, std::ostream& out) {
  const LemmaAuditReport rep = lemma_audit(seed, trials);
  bool ok = rep.ok(1e-8);

  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["trials"] = rep.trials;
  j["chain_instances"] = rep.chain_instances;
  j["gated_skips"] = rep.gated_skips;
  j["t_below_one"] = rep.t_below_one;
  j["max_violation"] = rep.max_violation;
  nlohmann::ordered_json checks;
  for (const auto& [name, violation] : rep.check_violation) {
    checks[name] = violation;
  }
  j["checks"] = checks;

  struct Fixture {
    const char* name;
    Graph g;
    CuriousSet F;
    double rho;
  };
  std::vector<Fixture> fixtures;
  {
    Graph k4 = named_graph("complete", 4);
    CuriousSet f3 = make_curious_set(k4, {3});
    fixtures.push_back({"complete4_f3_rho0", k4, f3, 0.0});
    fixtures.push_back({"complete4_f3_rho03", k4, f3, 0.3});
    Graph reg = generate_random_regular(16, 6, 77);
    CuriousSet f2 = select_curious(reg, 2, SelectionMode::uniform, 11);
    fixtures.push_back({"regular16_6_f2_rho01", reg, f2, 0.1});
  }

  nlohmann::ordered_json mixing = nlohmann::ordered_json::array();
  nlohmann::ordered_json deloc = nlohmann::ordered_json::array();
  for (const Fixture& fix : fixtures) {
    const double lambda = spectral_expansion(fix.g);
    const double alpha = adversarial_density(fix.g, fix.F).value();
    nlohmann::ordered_json mrow;
    mrow["fixture"] = fix.name;
    nlohmann::ordered_json drow;
    drow["fixture"] = fix.name;
    if (alpha < 1.0 - lambda) {
      const DieOutChain chain = build_chain(fix.g, fix.F, fix.rho);
      const MixingAudit audit = mixing_sanity(chain, alpha, lambda);
      mrow["gated"] = false;
      mrow["epsilon_exact"] = audit.epsilon_exact;
      mrow["bound"] = audit.bound;
      mrow["slack"] = audit.slack;
      mrow["ok"] = audit.ok();
      ok = ok && audit.ok();

      const SpectralSummary summary = spectral_summary(chain);
      const DelocalizationInterval interval = delocalization_interval(chain, alpha, lambda);
      bool contained = true;
      for (int i = 0; i < summary.phi1.size(); ++i) {
        const double sq = summary.phi1(i) * summary.phi1(i);
        contained = contained && sq >= interval.lo - 1e-12 && sq <= interval.hi + 1e-12;
      }
      drow["gated"] = false;
      drow["lo"] = interval.lo;
      drow["hi"] = interval.hi;
      drow["contained"] = contained;
      ok = ok && contained;
    } else {
      mrow["gated"] = true;
      drow["gated"] = true;
    }
    mixing.push_back(std::move(mrow));
    deloc.push_back(std::move(drow));
  }
  j["mixing_fixtures"] = mixing;
  j["delocalization_fixtures"] = deloc;
  j["ok"] = ok;
  out << j.dump(2) << '\n';
  return ok ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"source-anonymous gossip on expanders: leakage analysis and experiments"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-graph", "Generate a graph and save it as an edge list");
  int gg_n = 0;
  int gg_d = 0;
  std::uint64_t gg_seed = 1;
  std::string gg_kind = "random";
  std::string gg_out;
  gen->add_option("--n", gg_n, "Node count");
  gen->add_option("--d", gg_d, "Degree, random graphs only");
  gen->add_option("--seed", gg_seed, "Generation seed");
  gen->add_option("--kind", gg_kind, "random|complete|cycle|hypercube|path|petersen")
      ->capture_default_str();
  gen->add_option("--out", gg_out, "Output edge-list path")->required();

  auto* sp = app.add_subcommand("spectral",
                                "Spectral expansion, connectivity, adversarial density");
  std::string sp_graph;
  std::vector<int> sp_curious;
  int sp_cap = 200;
  sp->add_option("--graph", sp_graph, "Edge-list path")->required();
  sp->add_option("--curious", sp_curious, "Curious node ids")->delimiter(',');
  sp->add_option("--connectivity-cap", sp_cap, "Largest n for exact connectivity")
      ->capture_default_str();

  auto* pv = app.add_subcommand("privacy", "Exact leakage and closed-form bounds");
  std::string pv_graph;
  std::vector<int> pv_curious;
  std::string pv_protocol;
  std::string pv_mode = "worst";
  std::string pv_variant = "general";
  double pv_rho = 0.0;
  double pv_delta = 0.0;
  double pv_c = 0.0;
  int pv_b = 0;
  int pv_cap = 200;
  pv->add_option("--graph", pv_graph, "Edge-list path")->required();
  pv->add_option("--curious", pv_curious, "Curious node ids")->delimiter(',')->required();
  pv->add_option("--protocol", pv_protocol, "Protocol name")->required();
  pv->add_option("--rho", pv_rho, "Stopping parameter")->capture_default_str();
  pv->add_option("--b", pv_b, "Branch budget, anaconda only")->capture_default_str();
  pv->add_option("--mode", pv_mode, "worst|average")->capture_default_str();
  pv->add_option("--variant", pv_variant, "Density bound variant: general|dense")
      ->capture_default_str();
  pv->add_option("--delta", pv_delta, "Dense-variant delta")->capture_default_str();
  pv->add_option("--c", pv_c, "Dense-variant c")->capture_default_str();
  pv->add_option("--connectivity-cap", pv_cap, "Largest n for exact connectivity")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Run one execution and print its round trace");
  std::string sm_graph;
  std::string sm_protocol;
  std::vector<int> sm_curious;
  double sm_rho = 0.0;
  int sm_b = 0;
  int sm_source = 0;
  long long sm_horizon = 0;
  std::uint64_t sm_seed = 1;
  sim->add_option("--graph", sm_graph, "Edge-list path")->required();
  sim->add_option("--protocol", sm_protocol, "Protocol name")->required();
  sim->add_option("--rho", sm_rho, "Stopping parameter")->capture_default_str();
  sim->add_option("--b", sm_b, "Branch budget, anaconda only")->capture_default_str();
  sim->add_option("--source", sm_source, "Source node")->capture_default_str();
  sim->add_option("--horizon", sm_horizon, "Round cap, 0 = default")->capture_default_str();
  sim->add_option("--seed", sm_seed, "Execution seed")->capture_default_str();
  sim->add_option("--curious", sm_curious, "Curious node ids, die-out walk only")
      ->delimiter(',');

  auto* at = app.add_subcommand("attack", "Monte Carlo source-inference success rate");
  std::string at_graph;
  std::vector<int> at_curious;
  std::string at_protocol;
  std::string at_attack;
  double at_rho = 0.0;
  int at_b = 0;
  int at_trials = 1000;
  int at_prefix = 1;
  int at_lik = 2000;
  long long at_horizon = 0;
  std::uint64_t at_seed = 1;
  double at_eps = 0.0;
  bool at_exact = false;
  at->add_option("--graph", at_graph, "Edge-list path")->required();
  at->add_option("--curious", at_curious, "Curious node ids")->delimiter(',')->required();
  at->add_option("--protocol", at_protocol, "Protocol name")->required();
  at->add_option("--attack", at_attack, "first_contact|mle|map")->required();
  at->add_option("--rho", at_rho, "Stopping parameter")->capture_default_str();
  at->add_option("--b", at_b, "Branch budget, anaconda only")->capture_default_str();
  at->add_option("--trials", at_trials, "Attack trials")->capture_default_str();
  at->add_option("--seed", at_seed, "Attack seed")->capture_default_str();
  at->add_option("--prefix-length", at_prefix, "View prefix length for likelihoods")
      ->capture_default_str();
  at->add_option("--likelihood-trials", at_lik, "Simulations per candidate source")
      ->capture_default_str();
  at->add_option("--horizon", at_horizon, "Round cap, 0 = default")->capture_default_str();
  auto* at_eps_opt = at->add_option("--epsilon", at_eps, "Leakage for the success bound");
  at->add_flag("--epsilon-from-exact", at_exact,
               "Derive the success bound from the exact leakage");

  auto* sw = app.add_subcommand("sweep", "Run a config-driven sweep and write CSV/JSON");
  std::string sw_config;
  std::string sw_csv;
  std::string sw_json;
  sw->add_option("--config", sw_config, "JSON config path")->required();
  sw->add_option("--csv", sw_csv, "Override the CSV output path");
  sw->add_option("--json", sw_json, "Override the JSON output path");

  auto* au = app.add_subcommand("audit", "Numerical audit of the bound's matrix inequalities");
  std::uint64_t au_seed = 1;
  int au_trials = 100;
  au->add_option("--seed", au_seed, "Audit seed")->capture_default_str();
  au->add_option("--trials", au_trials, "Random instances")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const Graph g = gg_kind == "random" ? generate_random_regular(gg_n, gg_d, gg_seed)
                                          : named_graph(gg_kind, gg_n);
      save_edge_list(g, gg_out);
    } else if (sp->parsed()) {
      const Graph g = load_edge_list(sp_graph);
      nlohmann::ordered_json j;
      j["n"] = g.n;
      j["d"] = g.degree_uniform ? nlohmann::ordered_json(*g.degree_uniform)
                                : nlohmann::ordered_json(nullptr);
      j["lambda"] = spectral_expansion(g);
      j["kappa"] = g.n <= sp_cap ? nlohmann::ordered_json(vertex_connectivity(g, sp_cap))
                                 : nlohmann::ordered_json(nullptr);
      if (sp_curious.empty()) {
        j["alpha_f"] = nullptr;
      } else {
        const CuriousSet F = make_curious_set(g, sp_curious);
        j["alpha_f"] = adversarial_density(g, F).value();
      }
      out << j.dump(2) << '\n';
    } else if (pv->parsed()) {
      const Graph g = load_edge_list(pv_graph);
      const CuriousSet F = make_curious_set(g, pv_curious);
      const ProtocolSpec spec{protocol_kind_from_string(pv_protocol), pv_rho, pv_b};
      AnalyzeOptions opts;
      if (pv_variant == "general") {
        opts.variant = DensityVariant::general;
      } else if (pv_variant == "dense") {
        opts.variant = DensityVariant::dense;
      } else {
        throw std::invalid_argument("unknown density variant: " + pv_variant);
      }
      opts.delta = pv_delta;
      opts.c = pv_c;
      opts.connectivity_cap = pv_cap;
      const PrivacyReport rep = analyze(g, F, spec, adversary_mode_from_string(pv_mode), opts);
      out << privacy_report_json(rep).dump(2) << '\n';
    } else if (sim->parsed()) {
      const Graph g = load_edge_list(sm_graph);
      const ProtocolSpec spec{protocol_kind_from_string(sm_protocol), sm_rho, sm_b};
      const long long horizon = sm_horizon > 0 ? sm_horizon : default_horizon(g.n);
      std::optional<CuriousSet> F;
      if (!sm_curious.empty()) F = make_curious_set(g, sm_curious);
      const Execution exec = simulate(g, spec, sm_source, horizon, sm_seed, F ? &*F : nullptr);
      write_trace(exec, out);
    } else if (at->parsed()) {
      const Graph g = load_edge_list(at_graph);
      const CuriousSet F = make_curious_set(g, at_curious);
      const ProtocolSpec spec{protocol_kind_from_string(at_protocol), at_rho, at_b};
      AttackOptions opts;
      opts.prefix_length = at_prefix;
      opts.likelihood_trials = at_lik;
      opts.horizon = at_horizon;
      if (at_exact) {
        const DieOutChain chain = build_chain(g, F, effective_rho(spec));
        opts.epsilon = exact_epsilon(chain).epsilon;
      } else if (at_eps_opt->count() > 0) {
        opts.epsilon = at_eps;
      }
      const AttackReport rep =
          attack_success_rate(g, F, spec, attack_kind_from_string(at_attack),
                              uniform_prior(g, F), at_trials, at_seed, opts);
      out << attack_report_json(rep).dump(2) << '\n';
    } else if (sw->parsed()) {
      ExperimentConfig cfg = load_experiment_config(sw_config);
      if (!sw_csv.empty()) cfg.csv_path = sw_csv;
      if (!sw_json.empty()) cfg.json_path = sw_json;
      const SweepResult result = run_sweep(cfg);
      if (cfg.csv_path.empty()) {
        write_sweep_csv(result, out);
      } else {
        std::ofstream csv(cfg.csv_path);
        if (!csv) throw std::runtime_error("cannot open " + cfg.csv_path);
        write_sweep_csv(result, csv);
      }
      if (!cfg.json_path.empty()) {
        std::ofstream jout(cfg.json_path);
        if (!jout) throw std::runtime_error("cannot open " + cfg.json_path);
        jout << sweep_json(result).dump(2) << '\n';
      }
    } else if (au->parsed()) {
      return run_audit(au_seed, au_trials, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sag
