#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ivinv/setops.hpp"

namespace ivinv {

/// Real polynomial with ascending monomial coefficients.
/// Trailing coefficient is nonzero unless the polynomial is identically zero.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return c_; }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  double operator()(double x) const;
  Poly derivative() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(double s, const Poly& a);

 private:
  std::vector<double> c_;
};

/// num/den with den normalized to 1 at the anchor.
struct RationalFn {
  Poly num;
  Poly den{std::vector<double>{1.0}};
  double anchor = 0.0;

  double operator()(double x) const { return num(x) / den(x); }
};

struct Domain {
  double lo = -kInf;
  double hi = kInf;
};

/// All real roots of p in the domain, ascending, from balanced companion-matrix
/// eigenvalues polished by Newton steps and sign-bracket bisection.
std::vector<double> real_roots(const Poly& p, Domain domain = {});

struct FitDiagnostics {
  double max_residual = 0.0;  // worst |p/q - f| / (1 + |f|) on held-out points
  double scale = 0.0;         // half-width of the sampling window that passed
  double condition = 0.0;     // condition estimate of the final linear system
  int attempts = 0;
};

/// Recovers a rational function of known maximal degrees from point evaluations.
/// Throws std::runtime_error when the held-out residual check keeps failing.
RationalFn fit_rational(const std::function<double(double)>& f, int deg_num, int deg_den,
                        double anchor = 0.0, FitDiagnostics* diag = nullptr);

/// {x in domain : f(x) <= threshold}, exactly up to root accuracy.
IntervalUnion solve_rational_inequality(const RationalFn& f, double threshold, Domain domain = {});

// ---------------------------------------------------------------------------
// Chebyshev machinery on [-1, 1].

/// Second-kind nodes -cos(pi j / n), j = 0..n, ascending.
std::vector<double> cheb_nodes(int n);

/// Samples at the second-kind nodes of a given degree.
struct ChebBasis {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> node_values;

  static ChebBasis sample(const std::function<double(double)>& f, int degree);
};

/// Chebyshev series sum c_j T_j(x) on [-1, 1]; the canonical interpolant form.
class ChebSeries {
 public:
  ChebSeries() = default;
  explicit ChebSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double operator()(double x) const;
  /// Monomial form; only sensible for low degree.
  Poly to_monomial() const;

 private:
  std::vector<double> c_;
};

/// Chebyshev coefficients of the interpolant through values at cheb_nodes(n).
std::vector<double> cheb_coeffs_from_values(const std::vector<double>& values);

/// Unique degree <= N interpolant through the second-kind node samples.
ChebSeries cheb_interpolate(const ChebBasis& samples);

/// Eigenvalues of the colleague matrix, real ones only, mapped to [-1, 1].
std::vector<double> colleague_roots(const std::vector<double>& coeffs, double imag_tol = 1e-7);

/// All real roots in [-1, 1] of a Chebyshev series, ascending. High degrees are
/// handled by recursive subdivision with local resampling.
std::vector<double> cheb_roots(const ChebSeries& p);

struct SmoothRootOptions {
  int local_degree = 64;
  int max_depth = 24;
  double chop_tol = 1e-13;
  int max_intervals = 4096;  // total subintervals examined
  double noise_floor = 0.0;  // absolute coefficient level treated as resolved
};

/// Roots of a smooth function on [a, b] by adaptive piecewise Chebyshev
/// interpolation; candidate roots include tangential zeros and are refined by
/// bisection where a sign bracket exists.
std::vector<double> smooth_roots(const std::function<double(double)>& f, double a, double b,
                                 const SmoothRootOptions& opt = {});

/// Sorts, clusters points closer than tol * (1 + |x|), and returns one per cluster.
std::vector<double> dedupe_sorted(std::vector<double> xs, double tol = 1e-8);

}  // namespace ivinv
