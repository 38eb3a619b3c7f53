#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ivinv/polyalg.hpp"

namespace ivinv {

/// Real trigonometric polynomial a0 + sum_j (a_j cos j psi + b_j sin j psi).
///
/// With psi = 2 atan(beta), a degree-m trigonometric polynomial times
/// (1 + beta^2)^m is a degree-2m polynomial in beta, so homogeneous forms in
/// (cos, sin) of the half angle are represented exactly.
class TrigPoly {
 public:
  TrigPoly() : a_{0.0}, b_{0.0} {}
  TrigPoly(std::vector<double> a, std::vector<double> b);

  /// Exact coefficients from n >= 2m + 1 equispaced samples psi_i = -pi + 2 pi i / n.
  static TrigPoly from_samples(const std::vector<double>& values, int degree);
  static TrigPoly from_samples(const std::vector<long double>& values, int degree);
  /// Samples f at the equispaced grid used by from_samples.
  static TrigPoly fit(const std::function<double(double)>& f, int degree);

  int degree() const { return static_cast<int>(a_.size()) - 1; }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }

  /// Full-degree interpolants (n == 2m + 1 samples) evaluate by the barycentric
  /// formula on their samples, which keeps relative accuracy where the value is
  /// far below the coefficient scale; otherwise the coefficient sum is used.
  double operator()(double psi) const;
  /// Value and first two psi-derivatives.
  std::array<double, 3> derivs(double psi) const;
  double max_abs_coeff() const;

  /// Coefficients of P(beta) = f(2 atan beta) (1 + beta^2)^m for m >= degree().
  Poly to_beta_poly(int m) const;

  friend TrigPoly operator-(const TrigPoly& p, const TrigPoly& q);
  friend TrigPoly operator*(double s, const TrigPoly& p);

 private:
  std::vector<double> a_, b_;
  std::vector<long double> samples_;  // empty unless this is the exact interpolant of its samples
};

/// Ratio of trigonometric polynomials with den > 0 on the circle.
struct TrigRational {
  TrigPoly num;
  TrigPoly den;

  double operator()(double psi) const { return num(psi) / den(psi); }
  /// Value and first two psi-derivatives by the quotient rule.
  std::array<double, 3> derivs(double psi) const;
  /// Monomial rational form in beta, denominator normalized to 1 at beta = 0.
  RationalFn to_rational_fn() const;
  /// Degrees of the beta-polynomial form (twice the trigonometric degree).
  int beta_degree() const;
};

/// Maps between beta, the compact coordinate theta = (2/pi) atan(beta), and
/// the doubled angle psi = pi theta on which the statistics are periodic.
struct Compactification {
  static double forward(double beta);
  static double inverse(double theta);
  static double theta_to_psi(double theta);
};

}  // namespace ivinv
