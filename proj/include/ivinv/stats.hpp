#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ivinv/ivdata.hpp"
#include "ivinv/polyalg.hpp"
#include "ivinv/trig.hpp"

namespace ivinv {

/// a0 = (beta0, 1), b0 = (1, -beta0). The compact form uses the unit vectors
/// a = (sin phi, cos phi), b = (cos phi, -sin phi) with phi = pi theta / 2,
/// which stay finite at theta = +-1 (beta = +-inf).
struct NullVectors {
  Eigen::Vector2d a0;
  Eigen::Vector2d b0;
  double beta0 = 0.0;

  static NullVectors from_beta(double beta0);
  static NullVectors from_theta(double theta);
};

struct STPair {
  Eigen::VectorXd S;
  Eigen::VectorXd T;
  double beta0 = 0.0;
};

struct DirectStats {
  double ar = 0.0;
  double lm = 0.0;
  double rank = 0.0;
  double qlr = 0.0;
  double p = 0.0;  // LM score numerator
  double q = 0.0;  // LM score variance
  double det_omega = 0.0;
  double det_psi = 0.0;
  bool degenerate = false;     // R = 0: every statistic is 0 by convention
  bool lm_degenerate = false;  // q ~ 0: LM reported as +inf
  bool qlr_clamped = false;    // negative rounding in the QLR discriminant
};

/// Matrix-form evaluation of the statistics for one (R, Sigma).
class StatKernel {
 public:
  StatKernel() = default;
  explicit StatKernel(const SufficientStats& ss);

  int k() const { return k_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_inv() const { return sigma_inv_; }
  const Eigen::VectorXd& vec_r() const { return vec_r_; }

  /// (b' (x) I) Sigma (b (x) I).
  Eigen::MatrixXd omega(const Eigen::Vector2d& b) const;
  /// (a' (x) I) Sigma^{-1} (a (x) I).
  Eigen::MatrixXd psi(const Eigen::Vector2d& a) const;

  DirectStats eval(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  DirectStats eval(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::VectorXd& vecR) const;

  STPair st(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  /// B = Sigma (b (x) I) Omega_b^{-1/2} and A = (a (x) I) Psi_a^{-1/2}; vec(R) = B S + A T.
  Eigen::MatrixXd b_matrix(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  Eigen::MatrixXd a_matrix(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;

 private:
  int k_ = 0;
  Eigen::MatrixXd sigma_, sigma_inv_;
  Eigen::VectorXd vec_r_;
  double r_scale_ = 0.0;
};

double ar_stat(const SufficientStats& ss, double beta0);
/// +inf with the degenerate flag when the score variance vanishes.
double lm_stat(const SufficientStats& ss, double beta0);
double rank_stat(const SufficientStats& ss, double beta0);
double qlr_stat(const SufficientStats& ss, double beta0);
STPair st_decompose(const SufficientStats& ss, double beta0);
/// All statistics at beta0 (infinite beta0 uses the compact limit vectors).
DirectStats direct_stats(const SufficientStats& ss, double beta0);

/// QLR from (AR, LM, r) with the discriminant clamped at zero.
double qlr_from(double ar, double lm, double r, bool* clamped = nullptr);

/// Rational representations of AR, LM and r, fitted exactly from equispaced
/// samples of the matrix forms and checked at held-out points.
///
/// Data are rescaled by s = sqrt(tr(Sigma) / 2k) and the two outcome columns
/// are whitened by G = Wbar^{-1/2}, Wbar_ij = tr(Sigma_ij) / k. The forms are
/// trigonometric in the whitened angle psi~ of the direction G a; psi_of_theta
/// and theta_of_psi convert to the compact coordinate of beta. Statistics are
/// invariant under both transformations, and whitening keeps the determinant
/// factors of the high-degree forms well scaled.
struct StatProfile {
  SufficientStats scaled;
  double scale = 1.0;
  int k = 0;
  Eigen::Matrix2d whiten = Eigen::Matrix2d::Identity();
  StatKernel kernel;        // scaled, unwhitened data
  StatKernel white_kernel;  // scaled and whitened data; its angle is psi~
  TrigRational ar, lm, rank;
  bool degenerate = false;
  bool rank_constant = false;
  double ar_residual = 0.0, lm_residual = 0.0, rank_residual = 0.0;
  /// Interior theta roots of dr/dtheta, ascending, and the global maximum of r.
  std::vector<double> rank_critical;
  double rank_sup = 0.0;
  double theta_sup = 0.0;

  double psi_of_theta(double theta) const;
  /// Inverse map into [-1, 1].
  double theta_of_psi(double psi) const;
  double ar_theta(double theta) const { return ar(psi_of_theta(theta)); }
  double lm_theta(double theta) const { return lm(psi_of_theta(theta)); }
  double rank_theta(double theta) const { return rank(psi_of_theta(theta)); }
  double qlr_theta(double theta) const;
  DirectStats direct_theta(double theta) const;
  /// det Psi at the unit direction of theta (scaled data).
  double det_psi_theta(double theta) const;

  /// Monomial forms in beta, den(0) = 1.
  RationalFn ar_rational() const { return to_beta(ar); }
  RationalFn lm_rational() const { return to_beta(lm); }
  RationalFn rank_rational() const { return to_beta(rank); }
  RationalFn to_beta(const TrigRational& f) const;
};

StatProfile build_profile(const SufficientStats& ss);

/// sup_beta r(beta) - r(beta0), with the supremum over stationary points and the limit.
double lr_stat(const StatProfile& profile, double beta0);
double lr_stat_theta(const StatProfile& profile, double theta0);

/// Integrated-likelihood statistic in the units of the original data. Requires
/// k >= 2; +inf at infinite beta0 when k > 2.
double il_stat(const StatProfile& profile, double beta0);
/// log of the normalized integral int exp{(r(phi) - r0)/2} |Psi_a|^{-1/2}
/// |sin(phi - phi0)|^{k-2} dphi over one period (scaled data). The raw
/// statistic is this times s^k / |cos phi0|^{k-2}.
double il_log_normalized(const StatProfile& profile, double theta0, double rel_tol = 1e-7);

}  // namespace ivinv
