#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>

namespace ivinv {

/// (1 - alpha) quantile of chi-square with k degrees of freedom.
double chi2_quantile(int k, double alpha);
double chi2_cdf(int k, double x);
/// Standard normal quantile at probability p.
double normal_quantile(double p);

struct CvfSpec {
  int k = 1;
  double alpha = 0.05;
  double integration_tol = 1e-14;
  double bisect_tol = 1e-13;  // relative tolerance on kappa

  void validate() const;
};

/// Conditional CDF of the QLR statistic given the rank statistic r:
/// G(x, r) = C^{-1} int_0^{pi/2} F_k(x (x + r) / (x + r sin^2 t)) cos^{k-2} t dt,
/// C = B(1/2, (k-1)/2) / 2, so that G(inf, r) = 1. For k = 1, G = F_1.
double cqlr_cdf(double x, double r, int k, double tol = 1e-14);

struct CdfPartials {
  double G = 0.0, Gx = 0.0, Gr = 0.0, Gxx = 0.0, Gxr = 0.0, Grr = 0.0;
};
/// G and its first and second partials in (x, r), differentiated under the integral. k >= 2.
CdfPartials cqlr_cdf_partials(double x, double r, int k, double tol = 1e-14);

/// kappa_alpha(r): root of G(kappa, r) = 1 - alpha on [c_alpha(1), c_alpha(k)].
double cqlr_cvf(double r, const CvfSpec& spec);
/// (kappa', kappa'') by implicit differentiation. k >= 2.
std::pair<double, double> cqlr_cvf_derivs(double r, const CvfSpec& spec);

/// Memoized kappa with its first two derivatives. Cached neighbours only narrow
/// the root bracket; every value is solved to full tolerance.
class CqlrCvf {
 public:
  explicit CqlrCvf(CvfSpec spec);

  const CvfSpec& spec() const { return spec_; }
  double c1() const { return c1_; }
  double ck() const { return ck_; }

  double operator()(double r);
  /// (kappa, kappa', kappa'').
  std::array<double, 3> derivs(double r);
  std::size_t evaluations() const { return cache_.size(); }

 private:
  double solve(double r);

  CvfSpec spec_;
  double c1_, ck_;
  std::map<double, double> cache_;
};

struct McCvConfig {
  int draws = 10000;
  std::uint64_t seed = 20240917;
  bool common_random_numbers = true;
};

/// k x draws standard normal block from a seeded mt19937_64 stream.
Eigen::MatrixXd normal_draws(int draws, int k, std::uint64_t seed);

/// Index of the order statistic ceil((1 - alpha) n), zero-based.
std::size_t quantile_index(std::size_t n, double alpha);

using ConditionalEvaluator =
    std::function<double(double beta0, const Eigen::VectorXd& S, const Eigen::VectorXd& T)>;

/// Empirical (1 - alpha) quantile of phi(beta0, S_j, T) over S_j ~ N(0, I_k).
/// Without common random numbers the stream seed is perturbed by beta0.
double mc_conditional_cv(const ConditionalEvaluator& phi, double beta0, const Eigen::VectorXd& T,
                         const McCvConfig& cfg, double alpha);

}  // namespace ivinv
