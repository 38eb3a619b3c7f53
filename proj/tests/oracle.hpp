#pragma once
// Independent oracles shared by the unit tests and the acceptance binary.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "ivinv/critvals.hpp"
#include "ivinv/ivdata.hpp"
#include "ivinv/setops.hpp"
#include "ivinv/simulate.hpp"
#include "ivinv/stats.hpp"
#include "ivinv/trig.hpp"

namespace oracle {

using ivinv::IntervalUnion;
using ivinv::kInf;

inline double beta_of(double theta) { return ivinv::Compactification::inverse(theta); }
inline double theta_of(double beta) { return ivinv::Compactification::forward(beta); }

/// Random sufficient statistics: R ~ scale * N(0, 1), Sigma = L L' + eps I.
inline ivinv::SufficientStats random_ss(int k, std::uint64_t seed, double r_scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  ivinv::SufficientStats ss;
  ss.k = k;
  ss.n = 1000;
  ss.R.resize(k, 2);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < 2; ++j) ss.R(i, j) = r_scale * nd(gen);
  Eigen::MatrixXd L(2 * k, 2 * k);
  for (int i = 0; i < 2 * k; ++i)
    for (int j = 0; j < 2 * k; ++j) L(i, j) = nd(gen);
  ss.Sigma = L * L.transpose() / (2.0 * k) + 0.2 * Eigen::MatrixXd::Identity(2 * k, 2 * k);
  ss.Omega << ss.Sigma.topLeftCorner(k, k).trace() / k, ss.Sigma.topRightCorner(k, k).trace() / k,
      ss.Sigma.bottomLeftCorner(k, k).trace() / k, ss.Sigma.bottomRightCorner(k, k).trace() / k;
  return ss;
}

inline ivinv::ErrorKind error_kind(int i) {
  static const ivinv::ErrorKind kinds[] = {ivinv::ErrorKind::Homoskedastic, ivinv::ErrorKind::Heteroskedastic,
                                           ivinv::ErrorKind::Hac, ivinv::ErrorKind::Clustered};
  return kinds[i % 4];
}

inline ivinv::SufficientStats design_ss(int k, ivinv::ErrorKind e, double strength, std::uint64_t seed, int n = 250) {
  ivinv::DesignSpec d;
  d.n = n;
  d.k = k;
  d.errors = e;
  d.strength = strength;
  return ivinv::compute_sufficient_stats(ivinv::simulate_dataset(d, seed));
}

/// Plain bisection on a sign change of f in [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if ((fm <= 0) == (fa <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// {theta : excess(theta) <= 0} from m + 1 equispaced points on [-1, 1] with
/// bisection at every detected membership change. Returned in beta units.
struct ScanResult {
  IntervalUnion set;
  std::vector<double> theta_bounds;  // refined boundaries in theta
  double spacing = 0.0;
};

inline ScanResult scan_set(const std::function<double(double)>& excess, int m) {
  ScanResult out;
  out.spacing = 2.0 / m;
  std::vector<ivinv::Interval> parts;
  auto at = [&](int i) { return -1.0 + 2.0 * i / m; };
  bool in = excess(-1.0) <= 0.0;
  double start = -1.0;
  double prev = -1.0;
  for (int i = 1; i <= m; ++i) {
    const double t = (i == m) ? 1.0 : at(i);
    const bool acc = excess(t) <= 0.0;
    if (acc != in) {
      const double b = bisect(excess, prev, t);
      out.theta_bounds.push_back(b);
      if (acc) start = b;
      else parts.push_back({beta_of(start), beta_of(b)});
      in = acc;
    }
    prev = t;
  }
  if (in) parts.push_back({beta_of(start), kInf});
  if (!parts.empty() && parts.front().lo == beta_of(-1.0)) parts.front().lo = -kInf;
  out.set = IntervalUnion(parts);
  // A set accepted at both theta = -1 and 1 wraps through infinity; nothing to merge on the beta line.
  return out;
}

/// Compares an exact set against a scan oracle in theta units. Every scan
/// component must match an exact one within tol at both ends; every exact
/// component must match a scan component or be narrower than two grid
/// spacings with its interior confirmed accepted by a direct probe.
struct MatchReport {
  bool ok = true;
  std::string why;
  double max_boundary_gap = 0.0;
};

inline MatchReport match_sets(const IntervalUnion& exact, const ScanResult& scan,
                              const std::function<double(double)>& excess, double tol = 1e-6) {
  MatchReport rep;
  auto th = [](const ivinv::Interval& iv) { return std::pair{theta_of(iv.lo), theta_of(iv.hi)}; };
  std::vector<std::pair<double, double>> E, S;
  for (const auto& iv : exact.intervals()) E.push_back(th(iv));
  for (const auto& iv : scan.set.intervals()) S.push_back(th(iv));
  // Sets accepted at both theta ends wrap through infinity; both sides represent it the same way.
  std::vector<bool> used(E.size(), false);
  for (const auto& s : S) {
    bool found = false;
    for (std::size_t i = 0; i < E.size(); ++i) {
      const double g = std::max(std::abs(E[i].first - s.first), std::abs(E[i].second - s.second));
      if (g <= tol) {
        found = true;
        used[i] = true;
        rep.max_boundary_gap = std::max(rep.max_boundary_gap, g);
        break;
      }
    }
    if (!found) {
      rep.ok = false;
      rep.why = "scan component [" + std::to_string(s.first) + ", " + std::to_string(s.second) +
                "] (theta) missing from exact set " + exact.to_string();
      return rep;
    }
  }
  for (std::size_t i = 0; i < E.size(); ++i) {
    if (used[i]) continue;
    const double w = E[i].second - E[i].first;
    const double mid = 0.5 * (E[i].first + E[i].second);
    if (w <= 2.0 * scan.spacing && excess(mid) <= 1e-7) continue;  // below scan resolution, confirmed locally
    rep.ok = false;
    rep.why = "exact component [" + std::to_string(E[i].first) + ", " + std::to_string(E[i].second) +
              "] (theta) not found by scan";
    return rep;
  }
  return rep;
}

/// Symmetric difference measure of two sets on the compact scale.
inline double theta_symdiff(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<double> cuts{-1.0, 1.0};
  for (const auto& u : {a, b})
    for (const auto& iv : u.intervals()) {
      cuts.push_back(theta_of(iv.lo));
      cuts.push_back(theta_of(iv.hi));
    }
  std::sort(cuts.begin(), cuts.end());
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = beta_of(0.5 * (cuts[i] + cuts[i + 1]));
    if (a.contains(mid) != b.contains(mid)) m += cuts[i + 1] - cuts[i];
  }
  return m;
}

/// Homoskedastic largest eigenvalue of Omega^{-1/2} R'R Omega^{-1/2}.
inline double lambda_max(const ivinv::SufficientStats& ss) {
  const Eigen::MatrixXd Oih = ivinv::inv_sqrt_sym(ss.Omega);
  const Eigen::MatrixXd M = Oih * ss.R.transpose() * ss.R * Oih;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().maxCoeff();
}

/// Threshold form of the homoskedastic CQLR set: {beta : r(beta) >= r*} with
/// r* + kappa(r*) = lambda_max, solved independently of the geometric algorithm.
inline IntervalUnion homoskedastic_cqlr_oracle(const ivinv::SufficientStats& ss, double alpha, int m = 20000) {
  const int k = ss.k;
  ivinv::CvfSpec spec{k, alpha};
  const double lam = lambda_max(ss);
  if (lam <= ivinv::chi2_quantile(k, alpha)) return IntervalUnion::whole_line();
  auto h = [&](double r) { return r + ivinv::cqlr_cvf(r, spec) - lam; };
  double hi = lam;
  const double rstar = bisect(h, 0.0, hi, 100);
  const ivinv::StatKernel kern(ss);
  auto excess = [&](double theta) {
    const ivinv::NullVectors nv = ivinv::NullVectors::from_theta(theta);
    return rstar - kern.eval(nv.a0, nv.b0).rank;
  };
  return scan_set(excess, m).set;
}

/// Tabulated kappa on the compact scale u = r / (r + 10), linear in u. Used
/// only to classify scan points; boundaries are refined with the true kappa.
class KappaTable {
 public:
  KappaTable(int k, double alpha, int n = 4000) : spec_{k, alpha}, n_(n) {
    v_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) v_[static_cast<std::size_t>(i)] = ivinv::cqlr_cvf(r_of(static_cast<double>(i) / n), spec_);
    v_[static_cast<std::size_t>(n)] = ivinv::chi2_quantile(1, alpha);
  }
  double operator()(double r) const {
    const double u = r / (r + 10.0) * n_;
    const int i = std::min(n_ - 1, static_cast<int>(u));
    const double w = u - i;
    return (1 - w) * v_[static_cast<std::size_t>(i)] + w * v_[static_cast<std::size_t>(i) + 1];
  }
  double exact(double r) const { return ivinv::cqlr_cvf(r, spec_); }

 private:
  static double r_of(double u) { return 10.0 * u / (1.0 - u); }
  ivinv::CvfSpec spec_;
  int n_;
  std::vector<double> v_;
};

enum class Stat { AR, LM, CQLR };

/// Dense compact-scale scan of {stat <= crit} from the matrix forms, with
/// boundaries refined by bisection against the exact critical value.
inline ScanResult scan_exact(const ivinv::SufficientStats& ss, Stat stat, double alpha, int m,
                             const KappaTable* table = nullptr) {
  const ivinv::StatKernel kern(ss);
  const double c = stat == Stat::AR ? ivinv::chi2_quantile(ss.k, alpha) : ivinv::chi2_quantile(1, alpha);
  auto direct = [&](double theta) {
    const ivinv::NullVectors nv = ivinv::NullVectors::from_theta(theta);
    return kern.eval(nv.a0, nv.b0);
  };
  if (stat == Stat::AR) return scan_set([&](double t) { return direct(t).ar - c; }, m);
  if (stat == Stat::LM) return scan_set([&](double t) { return direct(t).lm - c; }, m);
  // Classify with the table, then re-run bisection at each change with the exact kappa.
  auto coarse = [&](double t) {
    const auto d = direct(t);
    return d.qlr - (*table)(d.rank);
  };
  auto fine = [&](double t) {
    const auto d = direct(t);
    return d.qlr - table->exact(d.rank);
  };
  ScanResult out;
  out.spacing = 2.0 / m;
  std::vector<ivinv::Interval> parts;
  bool in = fine(-1.0) <= 0.0;
  double start = -1.0, prev = -1.0;
  for (int i = 1; i <= m; ++i) {
    const double t = (i == m) ? 1.0 : -1.0 + 2.0 * i / m;
    const double cv = coarse(t);
    bool acc = cv <= 0.0;
    if (std::abs(cv) < 1e-6) acc = fine(t) <= 0.0;
    if (acc != in) {
      const double b = bisect(fine, prev, t, 60);
      out.theta_bounds.push_back(b);
      if (acc) start = b;
      else parts.push_back({beta_of(start), beta_of(b)});
      in = acc;
    }
    prev = t;
  }
  if (in) parts.push_back({beta_of(start), kInf});
  if (!parts.empty() && parts.front().lo == beta_of(-1.0)) parts.front().lo = -kInf;
  out.set = IntervalUnion(parts);
  return out;
}

/// Direct excess stat - crit at theta (exact kappa for CQLR).
inline std::function<double(double)> direct_excess(const ivinv::SufficientStats& ss, Stat stat, double alpha) {
  auto kern = std::make_shared<ivinv::StatKernel>(ss);
  const double c = stat == Stat::AR ? ivinv::chi2_quantile(ss.k, alpha) : ivinv::chi2_quantile(1, alpha);
  const ivinv::CvfSpec spec{ss.k, alpha};
  return [kern, c, stat, spec](double theta) {
    const ivinv::NullVectors nv = ivinv::NullVectors::from_theta(theta);
    const auto d = kern->eval(nv.a0, nv.b0);
    if (stat == Stat::AR) return d.ar - c;
    if (stat == Stat::LM) return d.lm - c;
    return d.qlr - ivinv::cqlr_cvf(d.rank, spec);
  };
}

}  // namespace oracle
