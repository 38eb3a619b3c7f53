#include "ivinv/critvals.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ivinv/errors.hpp"
#include "ivinv/quadrature.hpp"

namespace ivinv {

double chi2_quantile(int k, double alpha) {
  if (k < 1 || !(alpha > 0.0 && alpha < 1.0)) throw ConfigError("chi2_quantile: need k >= 1 and alpha in (0,1)");
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(k), alpha));
}

double chi2_cdf(int k, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * k, 0.5 * x);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(0.0, 1.0), p);
}

void CvfSpec::validate() const {
  if (k < 1) throw ConfigError("CvfSpec: k must be at least 1");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ConfigError("CvfSpec: alpha must lie in (0, 0.5]");
  if (!(integration_tol > 0.0) || !(bisect_tol > 0.0)) throw ConfigError("CvfSpec: tolerances must be positive");
}

namespace {

double norm_const(int k) { return 0.5 * boost::math::beta(0.5, 0.5 * (k - 1)); }

double chi2_pdf(int k, double x) {
  if (x <= 0.0) return 0.0;
  return 0.5 * boost::math::gamma_p_derivative(0.5 * k, 0.5 * x);
}

}  // namespace

double cqlr_cdf(double x, double r, int k, double tol) {
  if (x <= 0.0) return 0.0;
  if (k == 1 || r <= 0.0) return chi2_cdf(k, x);
  if (std::isinf(x)) return 1.0;
  const double e = k - 2.0;
  auto f = [&](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double h = x * (x + r) / (x + r * s * s);
    return std::array<double, 1>{chi2_cdf(k, h) * (e == 0.0 ? 1.0 : std::pow(c, e))};
  };
  QuadResult info;
  const auto v = integrate_gk15<1>(f, 0.0, 0.5 * std::numbers::pi, tol, tol, 4000, &info);
  if (!info.converged && info.abs_error > 1e-9)
    throw NumericalError("cqlr_cdf: quadrature did not converge (x = " + std::to_string(x) +
                         ", r = " + std::to_string(r) + ")");
  return std::clamp(v[0] / norm_const(k), 0.0, 1.0);
}

CdfPartials cqlr_cdf_partials(double x, double r, int k, double tol) {
  if (k < 2) throw ConfigError("cqlr_cdf_partials: requires k >= 2");
  if (!(x > 0.0) || r < 0.0) throw ConfigError("cqlr_cdf_partials: requires x > 0 and r >= 0");
  const double e = k - 2.0;
  auto f = [&](double t) {
    const double s = std::sin(t), c = std::cos(t), s2 = s * s;
    const double w = e == 0.0 ? 1.0 : std::pow(c, e);
    const double N = x * (x + r), D = x + r * s2;
    const double Nx = 2.0 * x + r, Nr = x;
    const double Dx = 1.0, Dr = s2;
    const double h = N / D;
    const double hx = Nx / D - N * Dx / (D * D);
    const double hr = Nr / D - N * Dr / (D * D);
    const double D3 = D * D * D;
    const double hxx = 2.0 / D - 2.0 * Nx * Dx / (D * D) + 2.0 * N * Dx * Dx / D3;
    const double hxr = 1.0 / D - (Nx * Dr + Nr * Dx) / (D * D) + 2.0 * N * Dx * Dr / D3;
    const double hrr = -2.0 * Nr * Dr / (D * D) + 2.0 * N * Dr * Dr / D3;
    const double fd = chi2_pdf(k, h);
    const double fp = fd * ((0.5 * k - 1.0) / h - 0.5);
    return std::array<double, 6>{w * chi2_cdf(k, h),          w * fd * hx,
                                 w * fd * hr,                 w * (fp * hx * hx + fd * hxx),
                                 w * (fp * hx * hr + fd * hxr), w * (fp * hr * hr + fd * hrr)};
  };
  QuadResult info;
  const auto v = integrate_gk15<6>(f, 0.0, 0.5 * std::numbers::pi, tol, tol, 4000, &info);
  const double C = norm_const(k);
  return {v[0] / C, v[1] / C, v[2] / C, v[3] / C, v[4] / C, v[5] / C};
}

namespace {

std::pair<double, double> implicit_derivs(double kappa, double r, int k, double tol) {
  const CdfPartials p = cqlr_cdf_partials(kappa, r, k, tol);
  if (!(p.Gx > 0.0)) throw NumericalError("cqlr_cvf_derivs: nonpositive density G_x at r = " + std::to_string(r));
  const double d1 = -p.Gr / p.Gx;
  const double d2 = -(p.Grr + 2.0 * p.Gxr * d1 + p.Gxx * d1 * d1) / p.Gx;
  return {d1, d2};
}

double solve_kappa(double r, const CvfSpec& spec, double lo, double hi, double c1, double ck) {
  if (spec.k == 1 || std::isinf(r)) return c1;
  if (r <= 0.0) return ck;
  const double target = 1.0 - spec.alpha;
  auto g = [&](double x) { return cqlr_cdf(x, r, spec.k, spec.integration_tol) - target; };
  double glo = g(lo);
  if (glo >= 0.0) {
    if (lo == c1) return c1;
    lo = c1;
    glo = g(lo);
    if (glo >= 0.0) return c1;
  }
  double ghi = g(hi);
  if (ghi <= 0.0) {
    if (hi == ck) return ck;
    hi = ck;
    ghi = g(hi);
    if (ghi <= 0.0) return ck;
  }
  std::uintmax_t iters = 200;
  auto tol = [&](double a, double b) { return std::abs(b - a) <= spec.bisect_tol * std::abs(a); };
  const auto br = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
  return 0.5 * (br.first + br.second);
}

}  // namespace

double cqlr_cvf(double r, const CvfSpec& spec) {
  spec.validate();
  if (r < 0.0) throw ConfigError("cqlr_cvf: r must be nonnegative");
  const double c1 = chi2_quantile(1, spec.alpha), ck = chi2_quantile(spec.k, spec.alpha);
  return solve_kappa(r, spec, c1, ck, c1, ck);
}

std::pair<double, double> cqlr_cvf_derivs(double r, const CvfSpec& spec) {
  if (spec.k < 2) throw ConfigError("cqlr_cvf_derivs: requires k >= 2");
  return implicit_derivs(cqlr_cvf(r, spec), r, spec.k, spec.integration_tol);
}

CqlrCvf::CqlrCvf(CvfSpec spec) : spec_(spec) {
  spec_.validate();
  c1_ = chi2_quantile(1, spec_.alpha);
  ck_ = chi2_quantile(spec_.k, spec_.alpha);
}

double CqlrCvf::solve(double r) {
  double lo = c1_, hi = ck_;
  auto it = cache_.lower_bound(r);
  if (it != cache_.end()) lo = std::max(lo, it->second);  // kappa nonincreasing in r
  if (it != cache_.begin()) hi = std::min(hi, std::prev(it)->second);
  if (lo > hi) std::swap(lo, hi);
  return solve_kappa(r, spec_, lo, hi, c1_, ck_);
}

double CqlrCvf::operator()(double r) {
  if (r < 0.0) r = 0.0;
  if (spec_.k == 1 || std::isinf(r)) return c1_;
  auto it = cache_.find(r);
  if (it != cache_.end()) return it->second;
  const double v = solve(r);
  cache_.emplace(r, v);
  return v;
}

std::array<double, 3> CqlrCvf::derivs(double r) {
  const double v = (*this)(r);
  if (spec_.k == 1 || std::isinf(r)) return {v, 0.0, 0.0};
  const auto [d1, d2] = implicit_derivs(v, std::max(r, 0.0), spec_.k, spec_.integration_tol);
  return {v, d1, d2};
}

Eigen::MatrixXd normal_draws(int draws, int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd S(k, draws);
  for (int j = 0; j < draws; ++j)
    for (int i = 0; i < k; ++i) S(i, j) = nd(gen);
  return S;
}

std::size_t quantile_index(std::size_t n, double alpha) {
  const double pos = std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
  return std::min(idx, n - 1);
}

double mc_conditional_cv(const ConditionalEvaluator& phi, double beta0, const Eigen::VectorXd& T,
                         const McCvConfig& cfg, double alpha) {
  if (cfg.draws < 1) throw ConfigError("mc_conditional_cv: draws must be positive");
  std::uint64_t seed = cfg.seed;
  if (!cfg.common_random_numbers) seed ^= std::bit_cast<std::uint64_t>(beta0) * 0x9E3779B97F4A7C15ULL;
  const Eigen::MatrixXd S = normal_draws(cfg.draws, static_cast<int>(T.size()), seed);
  std::vector<double> vals(static_cast<std::size_t>(cfg.draws));
  for (int j = 0; j < cfg.draws; ++j) {
    const double v = phi(beta0, S.col(j), T);
    if (!std::isfinite(v))
      throw NumericalError("mc_conditional_cv: evaluator returned a non-finite value at draw " +
                           std::to_string(j) + " (seed " + std::to_string(seed) + ")");
    vals[static_cast<std::size_t>(j)] = v;
  }
  const std::size_t idx = quantile_index(vals.size(), alpha);
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(idx), vals.end());
  return vals[idx];
}

}  // namespace ivinv
