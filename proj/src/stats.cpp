#include "ivinv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unsupported/Eigen/KroneckerProduct>
#include <string>

#include "ivinv/errors.hpp"
#include "ivinv/quadrature.hpp"

namespace ivinv {

NullVectors NullVectors::from_beta(double beta0) {
  if (std::isinf(beta0)) {
    NullVectors v = from_theta(beta0 > 0 ? 1.0 : -1.0);
    v.beta0 = beta0;
    return v;
  }
  NullVectors v;
  v.a0 = Eigen::Vector2d(beta0, 1.0);
  v.b0 = Eigen::Vector2d(1.0, -beta0);
  v.beta0 = beta0;
  return v;
}

NullVectors NullVectors::from_theta(double theta) {
  NullVectors v;
  if (std::abs(theta) >= 1.0) {
    const double sgn = theta > 0 ? 1.0 : -1.0;
    v.a0 = Eigen::Vector2d(sgn, 0.0);
    v.b0 = Eigen::Vector2d(0.0, -sgn);
    v.beta0 = sgn * kInf;
    return v;
  }
  const double phi = 0.5 * std::numbers::pi * theta;
  v.a0 = Eigen::Vector2d(std::sin(phi), std::cos(phi));
  v.b0 = Eigen::Vector2d(std::cos(phi), -std::sin(phi));
  v.beta0 = std::tan(phi);
  return v;
}

StatKernel::StatKernel(const SufficientStats& ss)
    : k_(ss.k), sigma_(0.5 * (ss.Sigma + ss.Sigma.transpose())), vec_r_(ss.vecR()) {
  if (sigma_.rows() != 2 * k_ || sigma_.cols() != 2 * k_ || ss.R.rows() != k_ || ss.R.cols() != 2)
    throw ConfigError("sufficient statistics have inconsistent dimensions");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma is not positive definite");
  sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(2 * k_, 2 * k_));
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose());
  r_scale_ = std::sqrt(sigma_.trace());
}

namespace {

Eigen::MatrixXd quad_block(const Eigen::MatrixXd& m, int k, const Eigen::Vector2d& c) {
  return c(0) * c(0) * m.topLeftCorner(k, k) +
         c(0) * c(1) * (m.topRightCorner(k, k) + m.bottomLeftCorner(k, k)) +
         c(1) * c(1) * m.bottomRightCorner(k, k);
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("inverse square root of a non positive-definite matrix");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd kron_col(const Eigen::Vector2d& c, int k) {
  Eigen::MatrixXd out(2 * k, k);
  out.topRows(k) = c(0) * Eigen::MatrixXd::Identity(k, k);
  out.bottomRows(k) = c(1) * Eigen::MatrixXd::Identity(k, k);
  return out;
}

}  // namespace

Eigen::MatrixXd StatKernel::omega(const Eigen::Vector2d& b) const { return quad_block(sigma_, k_, b); }
Eigen::MatrixXd StatKernel::psi(const Eigen::Vector2d& a) const { return quad_block(sigma_inv_, k_, a); }

double qlr_from(double ar, double lm, double r, bool* clamped) {
  if (std::isinf(lm)) return kInf;
  double disc = (ar - r) * (ar - r) + 4.0 * lm * r;
  if (disc < 0.0) {
    if (clamped) *clamped = true;
    disc = 0.0;
  }
  return std::max(0.0, 0.5 * (ar - r + std::sqrt(disc)));
}

DirectStats StatKernel::eval(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  return eval(a, b, vec_r_);
}

DirectStats StatKernel::eval(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::VectorXd& vecR) const {
  DirectStats d;
  const Eigen::MatrixXd Om = omega(b), Ps = psi(a);
  Eigen::LLT<Eigen::MatrixXd> lo(Om), lp(Ps);
  if (lo.info() != Eigen::Success || lp.info() != Eigen::Success)
    throw NumericalError("null-restricted covariance blocks are not positive definite");
  d.det_omega = Om.determinant();
  d.det_psi = Ps.determinant();
  if (vecR.norm() <= 1e-13 * r_scale_) {
    d.degenerate = true;
    return d;
  }
  const Eigen::VectorXd Rb = b(0) * vecR.head(k_) + b(1) * vecR.tail(k_);
  const Eigen::VectorXd w = sigma_inv_ * vecR;
  const Eigen::VectorXd u = a(0) * w.head(k_) + a(1) * w.tail(k_);
  const Eigen::VectorXd y = lo.solve(Rb);
  const Eigen::VectorXd x = lp.solve(u);
  d.ar = std::max(0.0, Rb.dot(y));
  d.rank = std::max(0.0, u.dot(x));
  d.p = y.dot(x);
  d.q = x.dot(lo.solve(x));
  const double qref = x.squaredNorm() / Om.diagonal().maxCoeff();
  if (!(d.q > 1e-14 * qref)) {
    d.lm_degenerate = true;
    d.lm = x.squaredNorm() == 0.0 ? 0.0 : kInf;
  } else {
    d.lm = d.p * d.p / d.q;
  }
  d.qlr = qlr_from(d.ar, d.lm, d.rank, &d.qlr_clamped);
  return d;
}

STPair StatKernel::st(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  STPair out;
  const Eigen::VectorXd Rb = b(0) * vec_r_.head(k_) + b(1) * vec_r_.tail(k_);
  const Eigen::VectorXd w = sigma_inv_ * vec_r_;
  const Eigen::VectorXd u = a(0) * w.head(k_) + a(1) * w.tail(k_);
  out.S = sym_inv_sqrt(omega(b)) * Rb;
  out.T = sym_inv_sqrt(psi(a)) * u;
  return out;
}

Eigen::MatrixXd StatKernel::b_matrix(const Eigen::Vector2d&, const Eigen::Vector2d& b) const {
  return sigma_ * kron_col(b, k_) * sym_inv_sqrt(omega(b));
}

Eigen::MatrixXd StatKernel::a_matrix(const Eigen::Vector2d& a, const Eigen::Vector2d&) const {
  return kron_col(a, k_) * sym_inv_sqrt(psi(a));
}

DirectStats direct_stats(const SufficientStats& ss, double beta0) {
  const NullVectors nv = NullVectors::from_beta(beta0);
  return StatKernel(ss).eval(nv.a0, nv.b0);
}

double ar_stat(const SufficientStats& ss, double beta0) { return direct_stats(ss, beta0).ar; }
double lm_stat(const SufficientStats& ss, double beta0) { return direct_stats(ss, beta0).lm; }
double rank_stat(const SufficientStats& ss, double beta0) { return direct_stats(ss, beta0).rank; }
double qlr_stat(const SufficientStats& ss, double beta0) { return direct_stats(ss, beta0).qlr; }

STPair st_decompose(const SufficientStats& ss, double beta0) {
  const NullVectors nv = NullVectors::from_beta(beta0);
  STPair p = StatKernel(ss).st(nv.a0, nv.b0);
  p.beta0 = beta0;
  return p;
}

double StatProfile::psi_of_theta(double theta) const {
  const NullVectors nv = NullVectors::from_theta(theta);
  const Eigen::Vector2d at = whiten * nv.a0;
  return 2.0 * std::atan2(at(0), at(1));
}

double StatProfile::theta_of_psi(double psi) const {
  const Eigen::Vector2d at(std::sin(0.5 * psi), std::cos(0.5 * psi));
  const Eigen::Vector2d a = whiten.inverse() * at;
  if (a(1) == 0.0) return 1.0;
  return 2.0 / std::numbers::pi * std::atan(a(0) / a(1));
}

double StatProfile::qlr_theta(double theta) const {
  const double psi = psi_of_theta(theta);
  return qlr_from(ar(psi), lm(psi), rank(psi));
}

DirectStats StatProfile::direct_theta(double theta) const {
  const NullVectors nv = NullVectors::from_theta(theta);
  return kernel.eval(nv.a0, nv.b0);
}

double StatProfile::det_psi_theta(double theta) const {
  const NullVectors nv = NullVectors::from_theta(theta);
  const double n2 = (whiten * nv.a0).squaredNorm();
  return std::pow(n2, k) * rank.den(psi_of_theta(theta));
}

RationalFn StatProfile::to_beta(const TrigRational& f) const {
  const int m = std::max(f.num.degree(), f.den.degree());
  const Poly pn = f.num.to_beta_poly(m), pd = f.den.to_beta_poly(m);
  // beta~ = (g11 beta + g12) / (g21 beta + g22); clear the denominator power 2m.
  const Poly t1({whiten(0, 1), whiten(0, 0)}), t2({whiten(1, 1), whiten(1, 0)});
  auto compose = [&](const Poly& p) {
    Poly acc;
    for (int j = 0; j <= 2 * m; ++j) {
      const double c = j < static_cast<int>(p.coeffs().size()) ? p.coeffs()[static_cast<std::size_t>(j)] : 0.0;
      if (c == 0.0) continue;
      Poly term({c});
      for (int i = 0; i < j; ++i) term = term * t1;
      for (int i = j; i < 2 * m; ++i) term = term * t2;
      acc = acc + term;
    }
    return acc;
  };
  Poly num = compose(pn), den = compose(pd);
  const double d0 = den(0.0);
  if (d0 == 0.0) throw NumericalError("rational form has a vanishing denominator at beta = 0");
  return RationalFn{(1.0 / d0) * num, (1.0 / d0) * den, 0.0};
}

namespace {

// Extended-precision sampling of the whitened statistics. The LM numerator and
// denominator span many orders of magnitude over the circle; double samples put a
// noise floor of eps * max on the interpolant, which is visible where they are small.
struct WideSampler {
  using ML = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  int k;
  ML sigma, sigma_inv;
  VL r, w;

  explicit WideSampler(const SufficientStats& ss) : k(ss.k) {
    sigma = ss.Sigma.cast<long double>();
    sigma = (0.5L * (sigma + sigma.transpose())).eval();
    sigma_inv = sigma.llt().solve(ML::Identity(2 * k, 2 * k));
    sigma_inv = (0.5L * (sigma_inv + sigma_inv.transpose())).eval();
    r = ss.vecR().cast<long double>();
    w = sigma_inv * r;
  }

  ML quad(const ML& m, long double c0, long double c1) const {
    return c0 * c0 * m.topLeftCorner(k, k) + c0 * c1 * (m.topRightCorner(k, k) + m.bottomLeftCorner(k, k)) +
           c1 * c1 * m.bottomRightCorner(k, k);
  }

  struct Sample {
    long double det_omega, det_psi, ar, rank, p, q;
  };

  Sample operator()(long double psi) const {
    const long double a0 = std::sin(0.5L * psi), a1 = std::cos(0.5L * psi), b0 = a1, b1 = -a0;
    const ML om = quad(sigma, b0, b1), ps = quad(sigma_inv, a0, a1);
    const Eigen::LLT<ML> lo(om), lp(ps);
    if (lo.info() != Eigen::Success || lp.info() != Eigen::Success)
      throw NumericalError("null-restricted covariance blocks are not positive definite");
    const VL rb = b0 * r.head(k) + b1 * r.tail(k);
    const VL u = a0 * w.head(k) + a1 * w.tail(k);
    const VL y = lo.solve(rb), x = lp.solve(u);
    long double dom = 1.0L, dps = 1.0L;
    for (int i = 0; i < k; ++i) {
      dom *= lo.matrixL()(i, i) * lo.matrixL()(i, i);
      dps *= lp.matrixL()(i, i) * lp.matrixL()(i, i);
    }
    return {dom, dps, rb.dot(y), u.dot(x), y.dot(x), x.dot(lo.solve(x))};
  }
};

TrigRational zero_form() { return {TrigPoly({0.0}, {0.0}), TrigPoly({1.0}, {0.0})}; }

double heldout_theta(int j) { return -1.0 + 2.0 * (j + 0.5) / 64.0 + 0.0071 * std::sin(1.7 * j); }

}  // namespace

StatProfile build_profile(const SufficientStats& ss) {
  StatProfile prof;
  prof.k = ss.k;
  const int k = ss.k;
  if (k < 1) throw ConfigError("build_profile: k must be at least 1");
  const double s = std::sqrt(ss.Sigma.trace() / (2.0 * k));
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("build_profile: Sigma has nonpositive trace");
  prof.scale = s;
  prof.scaled = ss;
  prof.scaled.R = ss.R / s;
  prof.scaled.Sigma = ss.Sigma / (s * s);
  prof.scaled.Omega = ss.Omega / (s * s);
  prof.kernel = StatKernel(prof.scaled);

  if (prof.kernel.vec_r().norm() <= 1e-13 * std::sqrt(prof.kernel.sigma().trace())) {
    prof.degenerate = true;
    prof.rank_constant = true;
    prof.ar = prof.lm = prof.rank = zero_form();
    return prof;
  }

  Eigen::Matrix2d wbar;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) wbar(i, j) = prof.scaled.Sigma.block(i * k, j * k, k, k).trace() / k;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(wbar);
  prof.whiten = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose();
  SufficientStats white = prof.scaled;
  white.R = prof.scaled.R * prof.whiten;
  Eigen::MatrixXd gk = Eigen::kroneckerProduct(prof.whiten, Eigen::MatrixXd::Identity(k, k));
  white.Sigma = gk * prof.scaled.Sigma * gk;
  const StatKernel wk(white);
  prof.white_kernel = wk;

  const int m_ar = k;
  const int m_lm = k == 1 ? k : 4 * k - 2;
  const int n = 2 * std::max(m_ar, m_lm) + 1;
  const WideSampler sample(white);
  std::vector<long double> ar_n(n), d_om(n), lm_n(n), lm_d(n), r_n(n), d_ps(n);
  for (int i = 0; i < n; ++i) {
    const long double pi = std::numbers::pi_v<long double>;
    const WideSampler::Sample d = sample(-pi + 2.0L * pi * i / n);
    const auto j = static_cast<std::size_t>(i);
    d_om[j] = d.det_omega;
    d_ps[j] = d.det_psi;
    ar_n[j] = d.ar * d.det_omega;
    r_n[j] = d.rank * d.det_psi;
    const long double pm = d.p * d.det_omega * d.det_psi;
    lm_n[j] = pm * pm;
    lm_d[j] = d.q * d.det_omega * d.det_omega * d.det_psi * d.det_psi;
  }
  prof.ar = {TrigPoly::from_samples(ar_n, m_ar), TrigPoly::from_samples(d_om, m_ar)};
  prof.rank = {TrigPoly::from_samples(r_n, m_ar), TrigPoly::from_samples(d_ps, m_ar)};
  prof.lm = k == 1 ? prof.ar : TrigRational{TrigPoly::from_samples(lm_n, m_lm), TrigPoly::from_samples(lm_d, m_lm)};

  double worst_theta = 0.0, worst = 0.0;
  for (int j = 0; j < 64; ++j) {
    const double th = heldout_theta(j);
    const DirectStats d = prof.direct_theta(th);
    auto rel = [](double fit, double direct) { return std::abs(fit - direct) / (1.0 + std::abs(direct)); };
    const double ea = rel(prof.ar_theta(th), d.ar);
    const double er = rel(prof.rank_theta(th), d.rank);
    const double el = d.lm_degenerate ? 0.0 : rel(prof.lm_theta(th), d.lm);
    prof.ar_residual = std::max(prof.ar_residual, ea);
    prof.rank_residual = std::max(prof.rank_residual, er);
    prof.lm_residual = std::max(prof.lm_residual, el);
    if (std::max({ea, er, el}) > worst) {
      worst = std::max({ea, er, el});
      worst_theta = th;
    }
  }
  if (worst > 1e-8) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "rational representation failed the held-out check: residual %.3g at theta = %.6f "
                  "(AR %.3g, LM %.3g, rank %.3g)",
                  worst, worst_theta, prof.ar_residual, prof.lm_residual, prof.rank_residual);
    throw NumericalError(msg);
  }

  // Stationary points of r: zeros of N'D - ND' in psi.
  auto dr = [&prof](double theta) {
    const double psi = prof.psi_of_theta(theta);
    const auto nd = prof.rank.num.derivs(psi);
    const auto dd = prof.rank.den.derivs(psi);
    return nd[1] * dd[0] - nd[0] * dd[1];
  };
  double dr_max = 0.0;
  for (int j = 0; j <= 256; ++j) dr_max = std::max(dr_max, std::abs(dr(-1.0 + 2.0 * j / 256.0)));
  const double dscale = prof.rank.num.max_abs_coeff() * prof.rank.den.max_abs_coeff();
  prof.rank_constant = !(dr_max > 1e-12 * dscale);
  if (!prof.rank_constant) {
    // Extrema only: a root must flip the sign of dr.
    for (double t : smooth_roots(dr, -1.0, 1.0)) {
      if (!(t > -1.0 + 1e-13 && t < 1.0 - 1e-13)) continue;
      const double h = 1e-7;
      if ((dr(std::max(-1.0, t - h)) > 0.0) != (dr(std::min(1.0, t + h)) > 0.0)) prof.rank_critical.push_back(t);
    }
  }
  prof.theta_sup = 1.0;
  prof.rank_sup = prof.rank_theta(1.0);
  for (double t : prof.rank_critical) {
    const double v = prof.rank_theta(t);
    if (v > prof.rank_sup) {
      prof.rank_sup = v;
      prof.theta_sup = t;
    }
  }
  return prof;
}

double lr_stat_theta(const StatProfile& profile, double theta0) {
  return std::max(0.0, profile.rank_sup - profile.rank_theta(theta0));
}

double lr_stat(const StatProfile& profile, double beta0) {
  return lr_stat_theta(profile, Compactification::forward(beta0));
}

double il_log_normalized(const StatProfile& profile, double theta0, double rel_tol) {
  if (profile.k < 2) throw ConfigError("the integrated-likelihood statistic requires k >= 2");
  const double phi0 = 0.5 * std::numbers::pi * std::clamp(theta0, -1.0, 1.0);
  const double r0 = profile.rank_theta(std::clamp(theta0, -1.0, 1.0));
  const double rmax = std::max(profile.rank_sup, r0);
  const double e = profile.k - 2.0;
  const Eigen::Matrix2d& G = profile.whiten;
  auto f = [&](double t) {
    const double phi = phi0 + t;
    const Eigen::Vector2d at = G * Eigen::Vector2d(std::sin(phi), std::cos(phi));
    const double psi = 2.0 * std::atan2(at(0), at(1));
    // |Psi_a| = |G a|^{2k} det Psi~(psi~) for unit a.
    const double det = std::pow(at.squaredNorm(), profile.k) * profile.rank.den(psi);
    const double w = e == 0.0 ? 1.0 : std::pow(std::abs(std::sin(t)), e);
    return std::array<double, 1>{std::exp(0.5 * (profile.rank(psi) - rmax)) * w / std::sqrt(det)};
  };
  QuadResult info;
  const auto v = integrate_gk15<1>(f, 0.0, std::numbers::pi, 0.0, rel_tol, 20000, &info);
  if (!info.converged)
    throw NumericalError("integrated-likelihood quadrature did not converge (error " +
                         std::to_string(info.abs_error) + ")");
  return std::log(v[0]) + 0.5 * (rmax - r0);
}

double il_stat(const StatProfile& profile, double beta0) {
  const double theta0 = Compactification::forward(beta0);
  const double ln = il_log_normalized(profile, theta0);
  if (std::abs(theta0) >= 1.0) return profile.k == 2 ? std::exp(ln + 2.0 * std::log(profile.scale)) : kInf;
  const double c = std::abs(std::cos(0.5 * std::numbers::pi * theta0));
  return std::exp(ln + profile.k * std::log(profile.scale) - (profile.k - 2.0) * std::log(c));
}

}  // namespace ivinv
