#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sag/graph.hpp"

// Linear algebra of the die-out walk: the absorbing chain over honest nodes
// whose death-site law carries everything the adversary can learn, plus the
// numerical audits of the matrix inequalities behind the closed-form leakage
// bound.

namespace sag {

// Absorbing chain of the die-out walk. Per step, a walker at honest node w
// is absorbed there with probability rho + (1-rho)*r(w); otherwise it moves
// to a uniformly random honest neighbor, encoded by the symmetric matrix q
// with entries 0 or 1/d.
struct DieOutChain {
  Eigen::MatrixXd q;            // honest-to-honest step matrix
  Eigen::VectorXd r;            // curious-neighbor fraction deg_F(w)/d per honest node
  double rho = 0.0;
  std::vector<int> node_index;  // matrix row -> original node id, ascending
  int n = 0;                    // node count of the underlying graph
  int d = 0;                    // common degree of the underlying graph

  int m() const { return static_cast<int>(node_index.size()); }
  int f() const { return n - m(); }
};

// Eigen-structure of q: top eigenvalue, largest remaining absolute
// eigenvalue, and the l2-normalized nonnegative top eigenvector.
struct SpectralSummary {
  double lambda1 = 0.0;
  double lambda_sub = 0.0;
  Eigen::VectorXd phi1;
};

// Assembles the chain for graph g with curious set F. Requires a regular
// graph and a connected honest subgraph.
DieOutChain build_chain(const Graph& g, const CuriousSet& F, double rho);

// M with M(w, v) = probability that a walk started at source v dies at w.
// Columns sum to 1. Solved by LU, never by series. Throws
// std::runtime_error when absorption is not certain (singular system).
Eigen::MatrixXd absorbing_probabilities(const DieOutChain& chain);

// (I - (1-rho) q)^-1, the expected-visits matrix of the walk before
// absorption. Symmetric and entrywise positive when the honest subgraph is
// connected and rho < 1.
Eigen::MatrixXd resolvent(const DieOutChain& chain);

// Independent oracle for resolvent(): sums the series
// sum_t ((1-rho) q)^t, truncating once the spectral tail bound
// c^(t+1)/(1-c) with c = (1-rho)*lambda1(q) drops below tol.
Eigen::MatrixXd series_resolvent_oracle(const DieOutChain& chain, double tol = 1e-14);

SpectralSummary spectral_summary(const DieOutChain& chain);

// The diagonal-rescaled pair (q_bar, q_under):
//   q_bar  = (I-R)^(-1/2) q (I-R)^(-1/2), top eigenvalue exactly 1,
//   q_under = (1-alpha_F) * q_bar,
// which sandwich q entrywise and carry its Perron structure.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_bar_q_underline(const DieOutChain& chain,
                                                              double alpha_F);

// Closed-form interval certain to contain every squared coordinate of the
// top eigenvector of q, valid when alpha_F < 1 - lambda.
struct DelocalizationInterval {
  double lo = 0.0;
  double hi = 1.0;
  double t = 0.0;        // inner ceiled horizon exponent; may fall below 1
  bool t_below_one = false;
};
DelocalizationInterval delocalization_interval(const DieOutChain& chain, double alpha_F,
                                               double lambda);

// Numerical audit of the matrix facts the closed-form leakage bound rests
// on, run over randomly generated chains and random matrices. Violations are
// reported, never thrown; max_violation <= slack means every inequality held.
struct LemmaAuditReport {
  int trials = 0;
  int chain_instances = 0;
  int gated_skips = 0;   // instances with alpha_F >= 1 - lambda, where the
                         // gated bounds do not apply
  int t_below_one = 0;   // delocalization horizons that ceiled below 1
  double max_violation = 0.0;
  std::map<std::string, double> check_violation;

  bool ok(double slack = 1e-8) const { return max_violation <= slack; }
};
LemmaAuditReport lemma_audit(std::uint64_t seed, int trials);

}  // namespace sag
