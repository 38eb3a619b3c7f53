#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ivinv/critvals.hpp"
#include "ivinv/invert_exact.hpp"
#include "ivinv/stats.hpp"

namespace ivinv {

struct ApproxConfig {
  int degree = 500;
  McCvConfig mc;
  double alpha = 0.05;
  double boundary_margin = 0.02;  // CDF units around 1 - alpha that trigger a tail re-estimate
  int il_panels = 32;             // composite 8-point Gauss-Legendre panels for the CIL integral

  void validate() const;
};

/// A statistic on the compact scale with its verified limits at theta = -1, 1.
struct CompactStat {
  std::function<double(double)> eval;
  double limit_lo = 0.0;
  double limit_hi = 0.0;
};

/// Wraps a beta-domain statistic. The limits are checked by comparing values
/// at |beta| = 1e6 and 1e8 (relative 1e-6); a failure throws ConfigError.
CompactStat compactify_stat(const std::function<double(double)>& stat_beta);

/// theta -> conditional CDF of the statistic at its observed value. refined,
/// when present, re-estimates with four times the draws.
struct Composite {
  std::function<double(double)> value;
  std::function<double(double)> refined;
};

/// Closed-form composites: F_k(AR), F_1(LM), and the conditional QLR CDF.
Composite exact_composite(const StatProfile& profile, Method method);

/// Monte Carlo composite for the CLR (sup r - r0) and CIL statistics. The pseudo
/// data vec R_j = B S_j + A T(theta0) are never formed: the rank statistic of R_j
/// is a trigonometric rational whose numerator coefficients are quadratic in S_j.
class ConditionalMc {
 public:
  ConditionalMc(const StatProfile& profile, Method method, const ApproxConfig& cfg);

  /// Fraction of simulated statistics <= the observed one at theta0.
  double composite(double theta0, bool refined = false) const;
  /// Observed statistic in the normalization used for the comparison.
  double observed(double theta0) const;
  /// Simulated statistics at theta0 (common draws).
  std::vector<double> simulated(double theta0, bool refined = false) const;

 private:
  struct NodeForms;
  NodeForms forms(double theta0) const;
  Eigen::VectorXd evaluate(const NodeForms& nf, const Eigen::MatrixXd& S) const;

  const StatProfile& profile_;
  Method method_;
  ApproxConfig cfg_;
  int k_;
  std::vector<Eigen::MatrixXd> P_;  // numerator trig-matrix coefficients [1, cos psi, sin psi, cos 2psi, ...]
  Eigen::MatrixXd draws_, draws4_;
  Eigen::MatrixXd grid_basis_;  // CLR grid, rows divided by the denominator
  std::vector<double> grid_psi_;
  std::vector<double> gl_nodes_, gl_weights_;
};

Composite mc_composite(const ConditionalMc& mc);

/// Interpolates the composite at degree + 1 second-kind nodes and solves
/// interpolant <= 1 - alpha on [-1, 1]; tails come from the theta = +-1 node
/// values, re-estimated when within the boundary margin.
InversionResult invert_conditional(const Composite& composite, const ApproxConfig& cfg, Method method);

/// Dispatch: exact composites for AR, LM and CQLR; Monte Carlo for CLR and CIL.
InversionResult invert_approx(const StatProfile& profile, Method method, const ApproxConfig& cfg);

}  // namespace ivinv
