#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ivinv/critvals.hpp"
#include "ivinv/setops.hpp"
#include "ivinv/stats.hpp"

namespace ivinv {

enum class Method { AR, LM, CQLR, CLR, CIL, TRATIO, GRID_EVEN, GRID_CHEB, APPROX };

std::string method_name(Method m);
/// Accepts the names above case-insensitively plus "grid-even", "grid-cheb".
Method parse_method(const std::string& name);

struct InversionResult {
  IntervalUnion set;
  Method method = Method::AR;
  double alpha = 0.05;
  bool exact = true;
  bool reliable = true;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

/// Builds a set from sorted boundary candidates in theta: consecutive candidates
/// (with -1 and 1 added) bound pieces classified by their midpoints; a candidate
/// outside every accepted piece becomes a singleton when touch(theta) holds.
IntervalUnion assemble_theta_set(std::vector<double> candidates, const std::function<bool(double)>& accept,
                                 const std::function<bool(double)>& touch);

/// Boundary thetas of {stat <= crit} for a trigonometric rational statistic.
std::vector<double> level_crossings(const StatProfile& profile, const TrigRational& stat, double crit);

InversionResult invert_ar(const StatProfile& profile, double alpha);
InversionResult invert_lm(const StatProfile& profile, double alpha);

/// A maximal theta interval on which r is strictly monotone. theta = +-1 both
/// stand for beta = inf, so the outermost pieces end there.
struct MonotonePiece {
  double theta_lo = -1.0, theta_hi = 1.0;
  double beta_lo = -kInf, beta_hi = kInf;
  double r_lo = 0.0, r_hi = 0.0;  // r at theta_lo and theta_hi
  bool increasing = true;
  std::vector<double> shape_breaks;  // theta, ascending, interior
};

std::vector<MonotonePiece> partition_injective(const StatProfile& profile);

/// Interior thetas where g(r) = QLR(theta(r)) changes monotonicity or
/// curvature: roots of the squared first- and second-derivative conditions
/// that survive a sign-change check of the unsquared expressions.
std::vector<double> shape_breaks(const MonotonePiece& piece, const StatProfile& profile,
                                 std::map<std::string, double>* diag = nullptr);

enum class GShape { Increasing, DecreasingConcave, DecreasingConvex };

/// Rank-domain functions for one segment. kappa returns (kappa, kappa').
struct RankDomainFns {
  std::function<double(double)> g;
  std::function<double(double)> dg;
  std::function<std::array<double, 2>(double)> kappa;
};

/// All roots of kappa - g on [r0, r1] for a segment where g keeps its
/// monotonicity and curvature; kappa is strictly decreasing and convex.
/// Throws NumericalError on stall.
std::vector<double> solve_rank_domain(double r0, double r1, GShape shape, const RankDomainFns& fns,
                                      double tol = 1e-10);

InversionResult invert_cqlr(const StatProfile& profile, const CvfSpec& spec);
/// Variant sharing a memoized critical value function.
InversionResult invert_cqlr(const StatProfile& profile, CqlrCvf& kappa);

}  // namespace ivinv
