#include "sag/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sag/privacy.hpp"
#include "sag/rng.hpp"

namespace sag {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve_symmetric(const Eigen::MatrixXd& mat,
                                                               bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      mat, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("solve_symmetric: eigensolver failed to converge");
  }
  return solver;
}

// Largest magnitude among all eigenvalues except the top one (ascending order).
double subdominant_magnitude(const Eigen::VectorXd& eigenvalues) {
  const auto k = eigenvalues.size();
  if (k < 2) return 0.0;
  return std::max(std::abs(eigenvalues(k - 2)), std::abs(eigenvalues(0)));
}

}  // namespace

DieOutChain build_chain(const Graph& g, const CuriousSet& F, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("build_chain: rho must lie in [0, 1]");
  }
  if (!g.degree_uniform) {
    throw std::invalid_argument("build_chain: graph is not regular");
  }
  if (!induced_subgraph_connected(g, F)) {
    throw std::invalid_argument("build_chain: honest subgraph is disconnected");
  }

  DieOutChain chain;
  chain.rho = rho;
  chain.n = g.n;
  chain.d = *g.degree_uniform;

  std::vector<char> curious(g.n, 0);
  for (int v : F.members) curious[v] = 1;
  std::vector<int> row(g.n, -1);
  for (int v = 0; v < g.n; ++v) {
    if (!curious[v]) {
      row[v] = static_cast<int>(chain.node_index.size());
      chain.node_index.push_back(v);
    }
  }

  const int m = chain.m();
  chain.q = Eigen::MatrixXd::Zero(m, m);
  chain.r = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    const int v = chain.node_index[i];
    int curious_neighbors = 0;
    for (int u : g.adjacency[v]) {
      if (curious[u]) {
        ++curious_neighbors;
      } else {
        chain.q(i, row[u]) = 1.0 / chain.d;
      }
    }
    chain.r(i) = static_cast<double>(curious_neighbors) / chain.d;
  }
  return chain;
}

Eigen::MatrixXd resolvent(const DieOutChain& chain) {
  const int m = chain.m();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd system = identity - (1.0 - chain.rho) * chain.q;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  Eigen::MatrixXd inverse = lu.solve(identity);
  const double residual = (system * inverse - identity).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-8) {
    throw std::runtime_error("resolvent: singular system, absorption is not certain");
  }
  return inverse;
}

Eigen::MatrixXd absorbing_probabilities(const DieOutChain& chain) {
  const int m = chain.m();
  if (chain.rho >= 1.0) return Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd death_rate =
      (chain.rho + (1.0 - chain.rho) * chain.r.array()).matrix();
  return death_rate.asDiagonal() * resolvent(chain);
}

Eigen::MatrixXd series_resolvent_oracle(const DieOutChain& chain, double tol) {
  const int m = chain.m();
  const double lambda1 = solve_symmetric(chain.q, false).eigenvalues()(m - 1);
  const double contraction = (1.0 - chain.rho) * lambda1;
  // The eigensolver can place lambda1 a few ulp below an exact 1; anything
  // this close to 1 needs a horizon far past any practical truncation.
  if (contraction >= 1.0 - 1e-12) {
    throw std::domain_error(
        "series_resolvent_oracle: series diverges, (1-rho)*lambda1(q) >= 1");
  }

  const Eigen::MatrixXd step = (1.0 - chain.rho) * chain.q;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m, m);
  // After adding the t-th power, the entrywise remainder is at most
  // contraction^(t+1)/(1-contraction) because |step^s| <= contraction^s
  // entrywise for a symmetric nonnegative step matrix.
  double tail = contraction / (1.0 - contraction);
  long long added = 0;
  while (tail >= tol) {
    term = term * step;
    sum += term;
    tail *= contraction;
    if (++added > 2'000'000) {
      throw std::runtime_error("series_resolvent_oracle: truncation horizon exceeded");
    }
  }
  return sum;
}

SpectralSummary spectral_summary(const DieOutChain& chain) {
  const auto solver = solve_symmetric(chain.q, true);
  const int m = chain.m();
  SpectralSummary summary;
  summary.lambda1 = solver.eigenvalues()(m - 1);
  summary.lambda_sub = subdominant_magnitude(solver.eigenvalues());
  summary.phi1 = solver.eigenvectors().col(m - 1);
  if (summary.phi1.sum() < 0.0) summary.phi1 = -summary.phi1;
  return summary;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_bar_q_underline(const DieOutChain& chain,
                                                              double alpha_F) {
  if (alpha_F >= 1.0) {
    throw std::invalid_argument("q_bar_q_underline: alpha_F must be below 1");
  }
  if (chain.r.maxCoeff() >= 1.0 - 1e-12) {
    throw std::invalid_argument(
        "q_bar_q_underline: a node has every neighbor curious, I - R is singular");
  }
  const Eigen::VectorXd scale = (1.0 - chain.r.array()).rsqrt().matrix();
  Eigen::MatrixXd q_bar = scale.asDiagonal() * chain.q * scale.asDiagonal();
  Eigen::MatrixXd q_under = (1.0 - alpha_F) * q_bar;
  return {std::move(q_bar), std::move(q_under)};
}

DelocalizationInterval delocalization_interval(const DieOutChain& chain, double alpha_F,
                                               double lambda) {
  if (!(alpha_F < 1.0 - lambda)) {
    throw std::invalid_argument("delocalization_interval: requires alpha_F < 1 - lambda");
  }
  const int m = chain.m();
  DelocalizationInterval interval;
  // T = ceil(log_{lambda/(1-alpha)}((1-alpha)/(4m))); the base tends to 0 as
  // lambda -> 0, where the ratio of logarithms vanishes, so lambda = 0 takes
  // the limit value T = 0.
  double t = 0.0;
  if (lambda > 0.0) {
    const double base = lambda / (1.0 - alpha_F);
    t = std::ceil(std::log((1.0 - alpha_F) / (4.0 * m)) / std::log(base));
  }
  interval.t = t;
  interval.t_below_one = t < 1.0;
  interval.lo = std::pow(1.0 - alpha_F, t + 1.0) / (2.0 * m);
  interval.hi = std::pow(1.0 - alpha_F, -t - 1.0) * 2.0 / m;
  return interval;
}

namespace {

struct AuditAccumulator {
  LemmaAuditReport report;

  // Record one inequality check; positive slack-free violations raise the
  // per-check and global maxima, clean passes still create the key.
  void record(const std::string& check, double violation) {
    const double v = std::max(violation, 0.0);
    auto& slot = report.check_violation[check];
    slot = std::max(slot, v);
    report.max_violation = std::max(report.max_violation, v);
  }
};

// One randomly generated (graph, curious set, rho) instance, auditing the
// spectral window, the rescaled sandwich pair, the eigenvector interval, and
// the resolvent envelopes on it.
void audit_chain_instance(std::mt19937_64& rng, AuditAccumulator& acc) {
  std::uniform_int_distribution<int> n_dist(8, 24);
  std::uniform_int_distribution<int> d_dist(3, 8);
  std::uniform_int_distribution<int> f_dist(1, 3);
  std::uniform_int_distribution<int> rho_pick(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n = n_dist(rng);
  int d = std::min(d_dist(rng), n - 2);
  if (n % 2 == 1 && d % 2 == 1) ++d;
  const int f = std::min(f_dist(rng), n - 2);

  const Graph g = generate_random_regular(n, d, rng());
  const double lambda = spectral_expansion(g);

  // Resample the curious set until the honest remainder is connected and no
  // honest node is fully surrounded (alpha_F = 1 degenerates the rescaling).
  CuriousSet curious_set;
  bool found = false;
  std::vector<int> ids(n);
  for (int v = 0; v < n; ++v) ids[v] = v;
  for (int attempt = 0; attempt < 64 && !found; ++attempt) {
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<int> members(ids.begin(), ids.begin() + f);
    CuriousSet candidate = make_curious_set(g, members);
    if (!induced_subgraph_connected(g, candidate)) continue;
    if (adversarial_density(g, candidate).value() >= 1.0) continue;
    curious_set = candidate;
    found = true;
  }
  if (!found) return;

  const double rho_options[] = {0.0, 0.1, 0.5, 0.9, unit(rng)};
  const double rho = rho_options[rho_pick(rng)];
  const double alpha_f = adversarial_density(g, curious_set).value();
  const DieOutChain chain = build_chain(g, curious_set, rho);
  const int m = chain.m();
  ++acc.report.chain_instances;

  const SpectralSummary summary = spectral_summary(chain);
  const double fraction = static_cast<double>(f) / n;
  const double window_lo = std::max(1.0 - alpha_f, 1.0 - (1.0 + lambda) * fraction);
  const double window_hi = 1.0 - (1.0 - lambda) * fraction;
  acc.record("lambda1_window",
             std::max(window_lo - summary.lambda1, summary.lambda1 - window_hi));
  acc.record("subdominant_interlacing", summary.lambda_sub - lambda);

  const auto [q_bar, q_under] = q_bar_q_underline(chain, alpha_f);
  const auto bar_solver = solve_symmetric(q_bar, true);
  const auto under_solver = solve_symmetric(q_under, false);

  acc.record("qbar_top_eigenvalue", std::abs(bar_solver.eigenvalues()(m - 1) - 1.0));
  acc.record("qunderline_top_eigenvalue",
             std::abs(under_solver.eigenvalues()(m - 1) - (1.0 - alpha_f)));
  acc.record("qbar_subdominant",
             subdominant_magnitude(bar_solver.eigenvalues()) - lambda / (1.0 - alpha_f));
  acc.record("qunderline_subdominant",
             subdominant_magnitude(under_solver.eigenvalues()) - lambda);
  acc.record("entrywise_sandwich",
             std::max((q_under - chain.q).maxCoeff(), (chain.q - q_bar).maxCoeff()));

  // The rescaled top eigenvector squares to honest-degree shares.
  Eigen::VectorXd bar_phi = bar_solver.eigenvectors().col(m - 1);
  double honest_degree_total = 0.0;
  for (int i = 0; i < m; ++i) honest_degree_total += chain.d * (1.0 - chain.r(i));
  double worst_square_gap = 0.0;
  for (int i = 0; i < m; ++i) {
    const double expected = chain.d * (1.0 - chain.r(i)) / honest_degree_total;
    worst_square_gap = std::max(worst_square_gap, std::abs(bar_phi(i) * bar_phi(i) - expected));
  }
  acc.record("qbar_top_eigenvector", worst_square_gap);

  if (!(alpha_f < 1.0 - lambda)) {
    ++acc.report.gated_skips;
    return;
  }

  const DelocalizationInterval interval = delocalization_interval(chain, alpha_f, lambda);
  if (interval.t_below_one) ++acc.report.t_below_one;
  for (int i = 0; i < m; ++i) {
    const double square = summary.phi1(i) * summary.phi1(i);
    acc.record("eigenvector_delocalization",
               std::max(interval.lo - square, square - interval.hi));
  }

  // Closed-form envelopes for the expected-visits matrix, evaluated at the
  // same horizon the leakage bound uses. Overflow to infinity in the upper
  // offset only loosens the envelope, which is the intended literal reading.
  const double t_tilde = t_tilde_horizon(lambda, alpha_f, m);
  const double mass = (chain.rho * m + f) * m;
  const Eigen::MatrixXd res = resolvent(chain);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m, m);
  const double upper_offset =
      (2.0 * n * std::pow(1.0 - alpha_f, -t_tilde) / mass + lambda) / (1.0 - lambda);
  acc.record("resolvent_upper",
             (res - identity - upper_offset * Eigen::MatrixXd::Ones(m, m)).maxCoeff());
  const double lower_offset =
      n * std::pow(1.0 - alpha_f, t_tilde) * std::pow(1.0 - chain.rho, t_tilde) / (8.0 * mass);
  acc.record("resolvent_lower",
             (identity + lower_offset * Eigen::MatrixXd::Ones(m, m) - res).maxCoeff());
}

// Random-matrix checks of the order-theoretic facts: products and powers
// preserve the entrywise order, nonnegative symmetric matrices have a
// nonnegative dominant eigenpair, and powers stay inside the rank-one
// envelope scaled by the subdominant magnitude.
void audit_matrix_lemmas(std::mt19937_64& rng, AuditAccumulator& acc) {
  std::uniform_int_distribution<int> size_dist(2, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  const int p = size_dist(rng);

  const auto random_matrix = [&](auto& dist) {
    Eigen::MatrixXd mat(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) mat(i, j) = dist(rng);
    }
    return mat;
  };

  const Eigen::MatrixXd lesser = random_matrix(unit);
  const Eigen::MatrixXd greater = lesser + random_matrix(unit);
  const Eigen::MatrixXd factor = random_matrix(unit);
  acc.record("product_order", std::max((lesser * factor - greater * factor).maxCoeff(),
                                       (factor * lesser - factor * greater).maxCoeff()));

  // Scale down before powering so entries stay bounded over the horizon.
  const Eigen::MatrixXd a = greater / (2.0 * p);
  const Eigen::MatrixXd b = lesser / (2.0 * p);
  Eigen::MatrixXd a_power = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd b_power = Eigen::MatrixXd::Identity(p, p);
  for (int t = 0; t <= 6; ++t) {
    acc.record("power_order", (b_power - a_power).maxCoeff());
    a_power = a_power * a;
    b_power = b_power * b;
  }

  const Eigen::MatrixXd nonneg_raw = random_matrix(unit);
  const Eigen::MatrixXd nonneg_sym = 0.5 * (nonneg_raw + nonneg_raw.transpose());
  const auto perron = solve_symmetric(nonneg_sym, true);
  const double lambda1 = perron.eigenvalues()(p - 1);
  Eigen::VectorXd top = perron.eigenvectors().col(p - 1);
  if (top.sum() < 0.0) top = -top;
  acc.record("nonneg_top_eigenpair",
             std::max({-lambda1, std::abs(perron.eigenvalues()(0)) - lambda1, -top.minCoeff()}));

  const Eigen::MatrixXd mixed_raw = random_matrix(signed_unit);
  const Eigen::MatrixXd mixed = 0.5 * (mixed_raw + mixed_raw.transpose());
  const auto mixed_solver = solve_symmetric(mixed, true);
  const double top_value = mixed_solver.eigenvalues()(p - 1);
  const double sub_value = subdominant_magnitude(mixed_solver.eigenvalues());
  const Eigen::VectorXd phi = mixed_solver.eigenvectors().col(p - 1);
  const Eigen::MatrixXd rank_one = phi * phi.transpose();
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p, p);
  double top_power = 1.0;
  double sub_power = 1.0;
  for (int t = 0; t <= 10; ++t) {
    const Eigen::MatrixXd deviation = power - top_power * rank_one;
    acc.record("rank_one_power_envelope",
               std::max(deviation.maxCoeff() - sub_power, (-deviation).maxCoeff() - sub_power));
    power = power * mixed;
    top_power *= top_value;
    sub_power *= sub_value;
  }
}

}  // namespace

LemmaAuditReport lemma_audit(std::uint64_t seed, int trials) {
  AuditAccumulator acc;
  acc.report.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    auto rng = rng_for(seed, static_cast<std::uint64_t>(trial));
    audit_chain_instance(rng, acc);
    audit_matrix_lemmas(rng, acc);
  }
  return acc.report;
}

}  // namespace sag
