#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ivinv/invert_exact.hpp"
#include "ivinv/polyalg.hpp"

namespace ivinv {

/// Scalar-parameter GMM model whose moment components are polynomials in theta.
struct PolyMomentModel {
  std::string name;
  int k = 1;  // moment components
  int d = 1;  // maximal theta degree
  /// (observation row, regime) -> k x (d + 1); column l multiplies theta^l.
  std::function<Eigen::MatrixXd(const Eigen::RowVectorXd&, int)> coefficients;
  std::vector<double> regimes;  // ascending interior breakpoints; empty for one regime
  bool centered = false;        // subtract g_n g_n' from the weight matrix
  double anchor = 0.0;          // where the fitted denominator is normalized
};

/// g(x, mu) = (mu - x, mu^2 + 1 - x^2) for x ~ N(mu, 1).
PolyMomentModel normal_mean_model();
/// g(x, mu) = mu - x.
PolyMomentModel linear_mean_model();

/// Builds a model from a JSON declaration:
/// {"name": ..., "d": 2, "centered": false, "components": [[term-list per power 0..d], ...]}
/// where a term is {"coef": c, "col": name, "power": p} (col optional) and the
/// coefficient of theta^l is the sum of c * x_col^p.
PolyMomentModel model_from_json(const std::string& json_text, const std::vector<std::string>& columns);

/// AR_n(theta) = n g_n' W_n^{-1} g_n for one regime, from precomputed moment sums.
class PolyArStat {
 public:
  PolyArStat(const PolyMomentModel& model, const Eigen::MatrixXd& data, int regime = 0);
  double operator()(double theta) const;
  int n() const { return n_; }

 private:
  int k_, d_, n_;
  bool centered_;
  Eigen::MatrixXd gbar_;              // k x (d + 1)
  std::vector<Eigen::MatrixXd> w_;    // power p -> k x k coefficient of theta^p, p <= 2d
};

/// Exact generalized AR set: a rational fit of degrees (2dk, 2dk) per regime,
/// held-out checked, then the rational inequality on each regime's domain.
InversionResult invert_poly_ar(const PolyMomentModel& model, const Eigen::MatrixXd& data, double alpha,
                               std::vector<RationalFn>* fitted = nullptr);

}  // namespace ivinv
