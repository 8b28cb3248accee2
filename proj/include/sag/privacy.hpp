#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sag/gossip.hpp"
#include "sag/graph.hpp"
#include "sag/spectral.hpp"

#include "json.hpp"

// Exact max-divergence leakage of the source-anonymous protocols via the
// death-site reduction, together with the closed-form upper bound, the
// adversarial-density bound, and the ln(f-1) lower bound.

namespace sag {

// (v, u, w): ordered source pair and the death site achieving the maximum
// ratio. Indices are original node ids.
struct WorstPair {
  int v = -1;
  int u = -1;
  int w = -1;
};

struct DivergenceMatrix {
  std::vector<int> nodes;  // non-curious ids, ascending; row/col order of d
  Eigen::MatrixXd d;       // d(i,j) = D_inf(W^nodes[i] || W^nodes[j]); may be inf
  double epsilon = 0.0;    // max entry
  WorstPair worst;
};

// sup over singleton outcomes of ln(p_i / q_i); +inf on support mismatch.
// Entries below 1e-15 are treated as exact zeros first.
double max_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

DivergenceMatrix exact_divergence_matrix(const DieOutChain& chain);

// Just the maximum and its witness, computed from per-column extrema without
// materializing the full pairwise matrix.
struct ExactEpsilon {
  double epsilon = 0.0;
  WorstPair worst;
};
ExactEpsilon exact_epsilon(const DieOutChain& chain);

// T-tilde from the closed-form bound: only the inner T carries a ceiling,
// the rest is evaluated as written. m is the honest-node count n - f.
// Requires lambda < 1 - alpha and lambda > 0 is not needed (lambda = 0 is
// taken as the limit T = 0).
double t_tilde_horizon(double lambda, double alpha, int m);

struct EpsilonUpper {
  double epsilon = 0.0;
  double t_tilde = 0.0;
};

// Closed-form leakage bound; nullopt when gated out by lambda >= 1 - alpha.
// Throws std::invalid_argument outside 0 <= rho < 1, 0 < lambda < 1,
// 0 <= alpha < 1.
std::optional<EpsilonUpper> epsilon_upper_bound(int n, int f, int d, double lambda, double rho,
                                                double alpha);

// Same closed form evaluated at an arbitrary alpha < 1 - lambda with the
// gate already checked by the caller; used for the audit at the true
// adversarial density. Exposed so the spectral module's resolvent envelopes
// share the exact horizon expression.
double divergence_bound_closed_form(int n, int f, double lambda, double rho, double alpha);

enum class DensityVariant { general, dense };

// High-probability bound on the adversarial density of a uniformly random
// curious set. The returned value may exceed 1; callers clip before gating.
// delta and c are the dense-variant parameters (ignored for general).
// Throws std::invalid_argument when the dense hypotheses fail.
double adversarial_density_bound(int n, int f, int d, DensityVariant variant, double delta = 0.0,
                                 double c = 0.0);

struct EpsilonLower {
  double epsilon = 0.0;
  bool worst_case_infinite = false;
};

// ln(f-1) for f >= 2, 0 for f = 1. The flag is set when the supplied vertex
// connectivity does not exceed f (a cut of curious nodes separates sources).
EpsilonLower epsilon_lower_bound(int f, std::optional<int> kappa = std::nullopt);

struct MixingAudit {
  double epsilon_exact = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double t_tilde = 0.0;
  double alpha_f = 0.0;
  bool ok() const { return epsilon_exact <= bound + 1e-9; }
};

// Checks the exact leakage against the closed form evaluated at the true
// adversarial density of the chain's curious set. Requires alpha_F < 1 -
// lambda and rho < 1; throws std::invalid_argument otherwise.
MixingAudit mixing_sanity(const DieOutChain& chain, double alpha_F, double lambda);

enum class AdversaryMode { worst, average };

AdversaryMode adversary_mode_from_string(const std::string& name);
std::string to_string(AdversaryMode mode);

struct AnalyzeOptions {
  DensityVariant variant = DensityVariant::general;
  double delta = 0.0;
  double c = 0.0;
  // Exact vertex connectivity is computed only up to this many nodes; above
  // it the worst-case-infinite flag is left unset and reported as unknown.
  int connectivity_cap = 200;
};

struct PrivacyReport {
  // params
  int n = 0;
  int f = 0;
  int d = 0;
  double lambda = 0.0;
  double rho = 0.0;
  std::string protocol;
  AdversaryMode mode = AdversaryMode::worst;

  double epsilon_exact = 0.0;  // may be inf
  WorstPair worst_pair;
  std::optional<EpsilonUpper> upper;  // nullopt = gated out
  EpsilonLower lower;
  bool connectivity_known = false;
  double alpha_used = 0.0;
  // Closed form at the true alpha_F with its slack over epsilon_exact;
  // absent when that gate fails or rho = 1.
  std::optional<MixingAudit> bound_at_true_density;
};

// Full pipeline: chain, exact divergence, upper bound at alpha = f/d (worst)
// or the density bound (average), lower bound, audit at the true alpha_F.
PrivacyReport analyze(const Graph& g, const CuriousSet& F, const ProtocolSpec& spec,
                      AdversaryMode mode, const AnalyzeOptions& opts = {});

// Stable key order: params, epsilon_exact, worst_pair, epsilon_upper,
// epsilon_lower, worst_case_infinite, t_tilde, alpha_used, lemma_c10_bound,
// slack. Infinities serialize as "inf"; a gated-out upper as "gated_out".
nlohmann::ordered_json privacy_report_json(const PrivacyReport& report);

}  // namespace sag
