#include "sag/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sag {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Probabilities this small are numerical noise: on a connected honest
// subgraph with rho < 1 every genuine entry is strictly positive.
constexpr double kZeroFloor = 1e-15;

double floored(double x) { return x < kZeroFloor ? 0.0 : x; }

// The divergence reduction requires a connected honest subgraph; hand-built
// chains bypass build_chain, so re-check on the step matrix support.
bool chain_support_connected(const DieOutChain& chain) {
  const int m = chain.m();
  if (m == 0) return false;
  std::vector<char> seen(m, 0);
  std::deque<int> frontier = {0};
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop_front();
    for (int j = 0; j < m; ++j) {
      if (!seen[j] && chain.q(i, j) > 0.0) {
        seen[j] = 1;
        ++reached;
        frontier.push_back(j);
      }
    }
  }
  return reached == m;
}

nlohmann::ordered_json json_real(double x) {
  if (std::isinf(x)) return nlohmann::ordered_json(x > 0 ? "inf" : "-inf");
  return nlohmann::ordered_json(x);
}

}  // namespace

double max_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("max_divergence: dimension mismatch");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9 ||
      p.minCoeff() < -1e-9 || q.minCoeff() < -1e-9) {
    throw std::invalid_argument("max_divergence: inputs must be probability vectors");
  }
  double worst = -kInfinity;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = floored(p(i));
    const double qi = floored(q(i));
    if (pi <= 0.0) continue;
    if (qi <= 0.0) return kInfinity;
    worst = std::max(worst, std::log(pi / qi));
  }
  return worst;
}

DivergenceMatrix exact_divergence_matrix(const DieOutChain& chain) {
  if (!chain_support_connected(chain)) {
    throw std::invalid_argument("exact_divergence_matrix: honest subgraph is disconnected");
  }
  const int m = chain.m();
  const Eigen::MatrixXd res = resolvent(chain);

  DivergenceMatrix out;
  out.nodes = chain.node_index;
  out.d = Eigen::MatrixXd::Zero(m, m);
  out.worst = {chain.node_index[0], chain.node_index[0], chain.node_index[0]};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      double best = -kInfinity;
      int best_w = 0;
      for (int w = 0; w < m; ++w) {
        const double top = floored(res(i, w));
        const double bottom = floored(res(j, w));
        if (top <= 0.0) continue;
        if (bottom <= 0.0) {
          best = kInfinity;
          best_w = w;
          break;
        }
        const double ratio = std::log(top / bottom);
        if (ratio > best) {
          best = ratio;
          best_w = w;
        }
      }
      out.d(i, j) = best;
      if (best > out.epsilon) {
        out.epsilon = best;
        out.worst = {chain.node_index[i], chain.node_index[j], chain.node_index[best_w]};
      }
    }
  }
  return out;
}

ExactEpsilon exact_epsilon(const DieOutChain& chain) {
  if (!chain_support_connected(chain)) {
    throw std::invalid_argument("exact_epsilon: honest subgraph is disconnected");
  }
  const int m = chain.m();
  const Eigen::MatrixXd res = resolvent(chain);

  ExactEpsilon out;
  out.worst = {chain.node_index[0], chain.node_index[0], chain.node_index[0]};
  if (m == 1) return out;

  // The worst ordered pair decomposes per death site: maximize the numerator
  // and minimize the denominator within each resolvent column.
  for (int w = 0; w < m; ++w) {
    int arg_hi = 0;
    int arg_lo = 0;
    for (int i = 1; i < m; ++i) {
      if (res(i, w) > res(arg_hi, w)) arg_hi = i;
      if (res(i, w) < res(arg_lo, w)) arg_lo = i;
    }
    if (arg_hi == arg_lo) arg_lo = (arg_hi + 1) % m;  // constant column, any pair ties
    const double top = floored(res(arg_hi, w));
    const double bottom = floored(res(arg_lo, w));
    if (top <= 0.0) continue;
    const double value = bottom <= 0.0 ? kInfinity : std::log(top / bottom);
    if (value > out.epsilon) {
      out.epsilon = value;
      out.worst = {chain.node_index[arg_hi], chain.node_index[arg_lo], chain.node_index[w]};
      if (std::isinf(value)) break;
    }
  }
  return out;
}

double t_tilde_horizon(double lambda, double alpha, int m) {
  if (m < 1) throw std::invalid_argument("t_tilde_horizon: need at least one honest node");
  if (!(lambda < 1.0 - alpha)) {
    throw std::invalid_argument("t_tilde_horizon: requires lambda < 1 - alpha");
  }
  // lambda = 0 is the literal limit: both logarithm ratios vanish, leaving
  // the additive constant.
  if (lambda <= 0.0) return 2.0;
  const double log_base = std::log(lambda / (1.0 - alpha));
  const double t_inner = std::ceil(std::log((1.0 - alpha) / (4.0 * m)) / log_base);
  return t_inner * (std::log(1.0 - alpha) / log_base + 2.0) + 2.0;
}

double divergence_bound_closed_form(int n, int f, double lambda, double rho, double alpha) {
  const int m = n - f;
  const double t_tilde = t_tilde_horizon(lambda, alpha, m);
  return std::log(rho * m + f) - 2.0 * t_tilde * std::log1p(-alpha) -
         t_tilde * std::log1p(-rho) - std::log1p(-lambda) + std::log(24.0);
}

std::optional<EpsilonUpper> epsilon_upper_bound(int n, int f, int d, double lambda, double rho,
                                                double alpha) {
  if (n < 2 || f < 1 || f >= n || d < 1) {
    throw std::invalid_argument("epsilon_upper_bound: need n >= 2, d >= 1, 1 <= f < n");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("epsilon_upper_bound: rho must lie in [0, 1)");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("epsilon_upper_bound: lambda must lie in (0, 1)");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("epsilon_upper_bound: alpha must lie in [0, 1)");
  }
  if (lambda >= 1.0 - alpha) return std::nullopt;

  EpsilonUpper out;
  out.t_tilde = t_tilde_horizon(lambda, alpha, n - f);
  out.epsilon = divergence_bound_closed_form(n, f, lambda, rho, alpha);
  return out;
}

double adversarial_density_bound(int n, int f, int d, DensityVariant variant, double delta,
                                 double c) {
  if (n < 1 || f < 1 || d < 1) {
    throw std::invalid_argument("adversarial_density_bound: n, f, d must be positive");
  }
  const double beta = static_cast<double>(f) / n;
  if (variant == DensityVariant::dense) {
    if (!(delta > 0.0) || !(c > 0.0)) {
      throw std::invalid_argument("adversarial_density_bound: dense variant needs delta > 0, c > 0");
    }
    if (!(beta > c)) {
      throw std::invalid_argument("adversarial_density_bound: dense variant requires f/n > c");
    }
    if (!(d > std::log(n) / (c * c * delta * delta))) {
      throw std::invalid_argument(
          "adversarial_density_bound: dense variant requires d > ln(n)/(c^2 delta^2)");
    }
    return (1.0 + delta) * beta;
  }
  const double gamma = std::log(n) / (std::numbers::e * d);
  const double larger = std::max(gamma, beta);
  const double log_gap = std::max(std::log(gamma) - std::log(beta), 0.0);
  return 4.0 * std::numbers::e * larger / (1.0 + log_gap);
}

EpsilonLower epsilon_lower_bound(int f, std::optional<int> kappa) {
  if (f < 1) throw std::invalid_argument("epsilon_lower_bound: f must be at least 1");
  EpsilonLower out;
  out.epsilon = f >= 2 ? std::log(static_cast<double>(f - 1)) : 0.0;
  out.worst_case_infinite = kappa.has_value() && *kappa <= f;
  return out;
}

MixingAudit mixing_sanity(const DieOutChain& chain, double alpha_F, double lambda) {
  if (!(alpha_F < 1.0 - lambda)) {
    throw std::invalid_argument("mixing_sanity: requires alpha_F < 1 - lambda");
  }
  if (chain.rho >= 1.0) {
    throw std::invalid_argument("mixing_sanity: requires rho < 1");
  }
  MixingAudit audit;
  audit.alpha_f = alpha_F;
  audit.t_tilde = t_tilde_horizon(lambda, alpha_F, chain.m());
  audit.bound = divergence_bound_closed_form(chain.n, chain.f(), lambda, chain.rho, alpha_F);
  audit.epsilon_exact = exact_epsilon(chain).epsilon;
  audit.slack = audit.bound - audit.epsilon_exact;
  return audit;
}

AdversaryMode adversary_mode_from_string(const std::string& name) {
  if (name == "worst") return AdversaryMode::worst;
  if (name == "average") return AdversaryMode::average;
  throw std::invalid_argument("adversary_mode_from_string: unknown mode '" + name + "'");
}

std::string to_string(AdversaryMode mode) {
  return mode == AdversaryMode::worst ? "worst" : "average";
}

PrivacyReport analyze(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                      AdversaryMode mode, const AnalyzeOptions& opts) {
  switch (spec.kind) {
    case ProtocolKind::random_walk:
    case ProtocolKind::cobra:
    case ProtocolKind::dandelion:
    case ProtocolKind::muting_push:
    case ProtocolKind::two_cobra:
      break;
    default:
      throw std::invalid_argument("analyze: protocol '" + to_string(spec.kind) +
                                  "' has no death-site reduction");
  }
  if (!g.degree_uniform) throw std::invalid_argument("analyze: graph is not regular");

  PrivacyReport report;
  report.n = g.n;
  report.f = F.f();
  report.d = *g.degree_uniform;
  report.lambda = spectral_expansion(g);
  report.rho = effective_rho(spec);
  report.protocol = to_string(spec.kind);
  report.mode = mode;

  const DieOutChain chain = build_chain(g, F, report.rho);
  const ExactEpsilon exact = exact_epsilon(chain);
  report.epsilon_exact = exact.epsilon;
  report.worst_pair = exact.worst;

  report.alpha_used =
      mode == AdversaryMode::worst
          ? static_cast<double>(report.f) / report.d
          : adversarial_density_bound(g.n, report.f, report.d, opts.variant, opts.delta, opts.c);
  // The density bound may exceed 1; the gate compares against the clipped
  // value since a density never does.
  const double alpha_gate = std::min(report.alpha_used, 1.0);
  if (alpha_gate < 1.0 - report.lambda) {
    if (report.rho < 1.0) {
      report.upper = epsilon_upper_bound(g.n, report.f, report.d, report.lambda, report.rho,
                                         report.alpha_used);
    } else {
      // rho = 1 kills the walk at its source: the exact leakage is infinite
      // and the closed form diverges with it, so report the limit value.
      report.upper =
          EpsilonUpper{kInfinity, t_tilde_horizon(report.lambda, report.alpha_used, chain.m())};
    }
  }

  std::optional<int> kappa;
  if (g.n <= opts.connectivity_cap) {
    kappa = vertex_connectivity(g, opts.connectivity_cap);
    report.connectivity_known = true;
  }
  report.lower = epsilon_lower_bound(report.f, kappa);

  const double alpha_f = adversarial_density(g, F).value();
  if (report.rho < 1.0 && alpha_f < 1.0 - report.lambda) {
    report.bound_at_true_density = mixing_sanity(chain, alpha_f, report.lambda);
  }
  return report;
}

nlohmann::ordered_json privacy_report_json(const PrivacyReport& report) {
  nlohmann::ordered_json j;
  j["params"] = {
      {"n", report.n},
      {"f", report.f},
      {"d", report.d},
      {"lambda", report.lambda},
      {"rho", report.rho},
      {"protocol", report.protocol},
      {"adversary_mode", to_string(report.mode)},
  };
  j["epsilon_exact"] = json_real(report.epsilon_exact);
  j["worst_pair"] = {report.worst_pair.v, report.worst_pair.u, report.worst_pair.w};
  if (report.upper) {
    j["epsilon_upper"] = json_real(report.upper->epsilon);
  } else {
    j["epsilon_upper"] = "gated_out";
  }
  j["epsilon_lower"] = json_real(report.lower.epsilon);
  if (report.connectivity_known) {
    j["worst_case_infinite"] = report.lower.worst_case_infinite;
  } else {
    j["worst_case_infinite"] = nullptr;
  }
  if (report.upper) {
    j["t_tilde"] = json_real(report.upper->t_tilde);
  } else {
    j["t_tilde"] = nullptr;
  }
  j["alpha_used"] = json_real(report.alpha_used);
  if (report.bound_at_true_density) {
    j["lemma_c10_bound"] = json_real(report.bound_at_true_density->bound);
    j["slack"] = json_real(report.bound_at_true_density->slack);
  } else {
    j["lemma_c10_bound"] = nullptr;
    j["slack"] = nullptr;
  }
  return j;
}

}  // namespace sag
