#include "ivinv/invert_approx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "ivinv/errors.hpp"
#include "ivinv/quadrature.hpp"

namespace ivinv {

void ApproxConfig::validate() const {
  if (degree < 8) throw ConfigError("approximation degree must be at least 8");
  if (!(boundary_margin > 0.0)) throw ConfigError("boundary margin must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (mc.draws < 1) throw ConfigError("Monte Carlo draws must be positive");
  if (il_panels < 1) throw ConfigError("integration panels must be positive");
}

CompactStat compactify_stat(const std::function<double(double)>& stat_beta) {
  CompactStat out;
  for (int side : {-1, 1}) {
    const double v6 = stat_beta(side * 1e6), v8 = stat_beta(side * 1e8), v10 = stat_beta(side * 1e10);
    auto close = [](double a, double b) {
      return std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b));
    };
    // A rational statistic approaches its limit like c / beta, so a large c can fail the
    // first pair; the second pair still rejects any divergence.
    if (!close(v6, v8) && !close(v8, v10))
      throw ConfigError("statistic has no finite limit as beta -> " + std::string(side < 0 ? "-inf" : "+inf") +
                        " (values " + std::to_string(v6) + ", " + std::to_string(v8) + ", " + std::to_string(v10) + " at 1e6, 1e8, 1e10)");
    (side < 0 ? out.limit_lo : out.limit_hi) = v8;
  }
  const double lo = out.limit_lo, hi = out.limit_hi;
  out.eval = [stat_beta, lo, hi](double theta) {
    if (theta <= -1.0) return lo;
    if (theta >= 1.0) return hi;
    return stat_beta(Compactification::inverse(theta));
  };
  return out;
}

Composite exact_composite(const StatProfile& profile, Method method) {
  const StatProfile* p = &profile;
  const int k = profile.k;
  Composite c;
  switch (method) {
    case Method::AR:
      c.value = [p, k](double t) { return chi2_cdf(k, p->ar_theta(t)); };
      break;
    case Method::LM:
      c.value = [p](double t) { return chi2_cdf(1, p->lm_theta(t)); };
      break;
    case Method::CQLR:
      if (k == 1) {
        c.value = [p](double t) { return chi2_cdf(1, p->ar_theta(t)); };
      } else {
        c.value = [p, k](double t) {
          const double q = p->qlr_theta(t);
          return std::isinf(q) ? 1.0 : cqlr_cdf(q, p->rank_theta(t), k);
        };
      }
      break;
    default:
      throw ConfigError("no closed-form composite for method " + method_name(method));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Monte Carlo composite

namespace {

// [1, cos psi, sin psi, ..., cos m psi, sin m psi].
Eigen::RowVectorXd trig_basis(double psi, int m) {
  Eigen::RowVectorXd b(2 * m + 1);
  b(0) = 1.0;
  const std::complex<double> z(std::cos(psi), std::sin(psi));
  std::complex<double> zj(1.0, 0.0);
  for (int j = 1; j <= m; ++j) {
    zj *= z;
    b(2 * j - 1) = zj.real();
    b(2 * j) = zj.imag();
  }
  return b;
}

Eigen::MatrixXd kron_col(const Eigen::Vector2d& c, int k) {
  Eigen::MatrixXd out(2 * k, k);
  out.topRows(k) = c(0) * Eigen::MatrixXd::Identity(k, k);
  out.bottomRows(k) = c(1) * Eigen::MatrixXd::Identity(k, k);
  return out;
}

}  // namespace

struct ConditionalMc::NodeForms {
  std::vector<Eigen::MatrixXd> K;  // per basis function, k x k
  Eigen::MatrixXd m;               // k x (2k + 1)
  Eigen::VectorXd n;               // 2k + 1
  Eigen::VectorXd S_obs;
  double r0 = 0.0;                 // T'T, the rank statistic at theta0
  Eigen::MatrixXd quad_basis;      // CIL only: basis / denominator at the rule nodes
  Eigen::VectorXd quad_logw;
};

ConditionalMc::ConditionalMc(const StatProfile& profile, Method method, const ApproxConfig& cfg)
    : profile_(profile), method_(method), cfg_(cfg), k_(profile.k) {
  cfg_.validate();
  if (method != Method::CLR && method != Method::CIL)
    throw ConfigError("Monte Carlo composite supports CLR and CIL only");
  if (method == Method::CIL && k_ < 2) throw ConfigError("the CIL test requires k >= 2 instruments");
  const StatKernel& wk = profile.white_kernel;
  const int k = k_, nb = 2 * k + 1;
  // r(psi) D(psi) = vecR' M(psi) vecR with M = Sigma^-1 (a (x) I) adj(Psi_a) (a' (x) I) Sigma^-1,
  // a trigonometric matrix of degree k.
  std::vector<Eigen::MatrixXd> samples;
  std::vector<double> psis;
  for (int i = 0; i < nb; ++i) {
    const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * i / nb;
    const Eigen::Vector2d a(std::sin(0.5 * psi), std::cos(0.5 * psi));
    const Eigen::MatrixXd Ps = wk.psi(a);
    const Eigen::MatrixXd L = wk.sigma_inv() * kron_col(a, k);
    samples.push_back(L * (Ps.determinant() * Ps.inverse()) * L.transpose());
    psis.push_back(psi);
  }
  P_.assign(static_cast<std::size_t>(nb), Eigen::MatrixXd::Zero(2 * k, 2 * k));
  for (int i = 0; i < nb; ++i) {
    const Eigen::RowVectorXd b = trig_basis(psis[static_cast<std::size_t>(i)], k);
    for (int j = 0; j < nb; ++j)
      P_[static_cast<std::size_t>(j)] += (j == 0 ? 1.0 : 2.0) / nb * b(j) * samples[static_cast<std::size_t>(i)];
  }
  for (auto& M : P_) M = 0.5 * (M + M.transpose());

  if (cfg_.mc.common_random_numbers) {
    draws_ = normal_draws(cfg_.mc.draws, k, cfg_.mc.seed);
    draws4_ = normal_draws(4 * cfg_.mc.draws, k, cfg_.mc.seed);
  }
  if (method == Method::CLR) {
    const int G = std::max(64, 16 * k);
    grid_basis_.resize(G, nb);
    for (int g = 0; g < G; ++g) {
      const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * g / G;
      grid_psi_.push_back(psi);
      grid_basis_.row(g) = trig_basis(psi, k) / profile.rank.den(psi);
    }
  } else {
    const auto [x, w] = gauss_legendre(8);
    const double h = std::numbers::pi / cfg_.il_panels;
    for (int p = 0; p < cfg_.il_panels; ++p)
      for (std::size_t i = 0; i < x.size(); ++i) {
        gl_nodes_.push_back(h * (p + 0.5 * (x[i] + 1.0)));
        gl_weights_.push_back(0.5 * h * w[i]);
      }
  }
}

ConditionalMc::NodeForms ConditionalMc::forms(double theta0) const {
  const int k = k_, nb = 2 * k + 1;
  const StatKernel& wk = profile_.white_kernel;
  const NullVectors nv = NullVectors::from_theta(theta0);
  Eigen::Vector2d a = profile_.whiten * nv.a0;
  a.normalize();
  const Eigen::Vector2d b(a(1), -a(0));
  const STPair st = wk.st(a, b);
  const Eigen::MatrixXd B = wk.b_matrix(a, b);
  const Eigen::VectorXd AT = wk.a_matrix(a, b) * st.T;
  NodeForms nf;
  nf.S_obs = st.S;
  nf.r0 = st.T.squaredNorm();
  nf.m.resize(k, nb);
  nf.n.resize(nb);
  for (int j = 0; j < nb; ++j) {
    const Eigen::MatrixXd& P = P_[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd PB = P * B;
    nf.K.push_back(B.transpose() * PB);
    nf.m.col(j) = PB.transpose() * AT;
    nf.n(j) = AT.dot(P * AT);
  }
  if (method_ == Method::CIL) {
    const double phi0 = 0.5 * std::numbers::pi * std::clamp(theta0, -1.0, 1.0);
    const std::size_t M = gl_nodes_.size();
    nf.quad_basis.resize(static_cast<Eigen::Index>(M), nb);
    nf.quad_logw.resize(static_cast<Eigen::Index>(M));
    for (std::size_t q = 0; q < M; ++q) {
      const double t = gl_nodes_[q], phi = phi0 + t;
      const Eigen::Vector2d at = profile_.whiten * Eigen::Vector2d(std::sin(phi), std::cos(phi));
      const double psi = 2.0 * std::atan2(at(0), at(1));
      const double D = profile_.rank.den(psi);
      const double logdet = k * std::log(at.squaredNorm()) + std::log(D);
      const auto qi = static_cast<Eigen::Index>(q);
      nf.quad_basis.row(qi) = trig_basis(psi, k) / D;
      nf.quad_logw(qi) = std::log(gl_weights_[q]) + (k - 2.0) * std::log(std::abs(std::sin(t))) - 0.5 * logdet;
    }
  }
  return nf;
}

Eigen::VectorXd ConditionalMc::evaluate(const NodeForms& nf, const Eigen::MatrixXd& S) const {
  const int k = k_, nb = 2 * k + 1;
  const Eigen::Index N = S.cols();
  Eigen::MatrixXd C(nb, N);
  for (int j = 0; j < nb; ++j) {
    const Eigen::MatrixXd KS = nf.K[static_cast<std::size_t>(j)] * S;
    C.row(j) = S.cwiseProduct(KS).colwise().sum() + 2.0 * nf.m.col(j).transpose() * S;
    C.row(j).array() += nf.n(j);
  }
  Eigen::VectorXd out(N);
  if (method_ == Method::CLR) {
    const Eigen::MatrixXd V = grid_basis_ * C;
    const int G = static_cast<int>(grid_psi_.size());
    const double step = 2.0 * std::numbers::pi / G;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (Eigen::Index j = 0; j < N; ++j) {
      Eigen::Index g = 0;
      double best = V.col(j).maxCoeff(&g);
      auto r_at = [&](double psi) { return trig_basis(psi, k).dot(C.col(j)) / profile_.rank.den(psi); };
      double lo = grid_psi_[static_cast<std::size_t>(g)] - step, hi = lo + 2.0 * step;
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo), fc = r_at(c), fd = r_at(d);
      for (int it = 0; it < 30; ++it) {
        if (fc > fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - gr * (hi - lo);
          fc = r_at(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + gr * (hi - lo);
          fd = r_at(d);
        }
      }
      best = std::max({best, fc, fd});
      out(j) = std::max(best, nf.r0) - nf.r0;
    }
  } else {
    const Eigen::MatrixXd V = nf.quad_basis * C;
    for (Eigen::Index j = 0; j < N; ++j) {
      const Eigen::ArrayXd e = nf.quad_logw.array() + 0.5 * V.col(j).array();
      const double mx = e.maxCoeff();
      out(j) = mx + std::log((e - mx).exp().sum()) - 0.5 * nf.r0;
    }
  }
  return out;
}

double ConditionalMc::observed(double theta0) const {
  const NodeForms nf = forms(theta0);
  return evaluate(nf, nf.S_obs)(0);
}

std::vector<double> ConditionalMc::simulated(double theta0, bool refined) const {
  const NodeForms nf = forms(theta0);
  Eigen::VectorXd v;
  if (cfg_.mc.common_random_numbers) {
    v = evaluate(nf, refined ? draws4_ : draws_);
  } else {
    const std::uint64_t seed = cfg_.mc.seed ^ (std::bit_cast<std::uint64_t>(theta0) * 0x9E3779B97F4A7C15ULL);
    v = evaluate(nf, normal_draws((refined ? 4 : 1) * cfg_.mc.draws, k_, seed));
  }
  return {v.data(), v.data() + v.size()};
}

double ConditionalMc::composite(double theta0, bool refined) const {
  const NodeForms nf = forms(theta0);
  const double obs = evaluate(nf, nf.S_obs)(0);
  const std::vector<double> sims = simulated(theta0, refined);
  std::size_t below = 0;
  for (double s : sims) {
    if (!std::isfinite(s)) throw NumericalError("simulated statistic is not finite");
    below += s <= obs;
  }
  return static_cast<double>(below) / static_cast<double>(sims.size());
}

Composite mc_composite(const ConditionalMc& mc) {
  const ConditionalMc* p = &mc;
  return Composite{[p](double t) { return p->composite(t, false); }, [p](double t) { return p->composite(t, true); }};
}

// ---------------------------------------------------------------------------

InversionResult invert_conditional(const Composite& composite, const ApproxConfig& cfg, Method method) {
  cfg.validate();
  // The squared composite is interpolated: a CDF vanishing like |theta - theta*| at
  // a zero of the statistic becomes smooth there, and v <= tau iff v^2 <= tau^2.
  const double tau = 1.0 - cfg.alpha, tau2 = tau * tau;
  ChebBasis cb;
  cb.degree = cfg.degree;
  cb.nodes = cheb_nodes(cfg.degree);
  std::vector<double> raw;
  raw.reserve(cb.nodes.size());
  for (double x : cb.nodes) {
    raw.push_back(composite.value(x));
    cb.node_values.push_back(raw.back() * raw.back());
  }
  const ChebSeries p = cheb_interpolate(cb);

  double resid = 0.0;
  for (std::size_t i = 0; i + 1 < cb.nodes.size(); ++i) {
    const double x = 0.5 * (cb.nodes[i] + cb.nodes[i + 1]);
    const double v = composite.value(x);
    resid = std::max(resid, std::abs(std::sqrt(std::max(0.0, p(x))) - v));
  }

  InversionResult res;
  res.method = method;
  res.alpha = cfg.alpha;
  res.exact = false;

  auto tail = [&](double end_value, double theta, const char* name) {
    double v = end_value;
    if (std::abs(v - tau) <= cfg.boundary_margin && composite.refined) {
      v = composite.refined(theta);
      res.diagnostics[std::string("tail_reestimated_") + name] = v;
    }
    return v <= tau;
  };
  const bool accept_lo = tail(raw.front(), -1.0, "lo");
  const bool accept_hi = tail(raw.back(), 1.0, "hi");

  std::vector<double> shifted = p.coeffs();
  shifted[0] -= tau2;
  std::vector<double> roots;
  bool nonzero = std::any_of(shifted.begin(), shifted.end(), [](double c) { return c != 0.0; });
  if (nonzero)
    for (double r : cheb_roots(ChebSeries(shifted)))
      if (r > -1.0 && r < 1.0) roots.push_back(r);

  std::vector<double> pts{-1.0};
  pts.insert(pts.end(), roots.begin(), roots.end());
  pts.push_back(1.0);
  const std::size_t m = pts.size() - 1;
  std::vector<Interval> th;
  for (std::size_t i = 0; i < m; ++i) {
    bool acc = p(0.5 * (pts[i] + pts[i + 1])) <= tau2;
    if (m > 1 && i == 0) acc = accept_lo;
    if (m > 1 && i + 1 == m) acc = accept_hi;
    if (!acc) continue;
    if (!th.empty() && th.back().hi == pts[i]) th.back().hi = pts[i + 1];
    else th.push_back({pts[i], pts[i + 1]});
  }
  std::vector<Interval> out;
  for (const auto& iv : th) out.push_back({Compactification::inverse(iv.lo), Compactification::inverse(iv.hi)});
  res.set = IntervalUnion(std::move(out));
  res.reliable = resid <= 0.05;
  if (!res.reliable) res.notes.push_back("UNRELIABLE: interpolation residual exceeds 0.05");
  res.diagnostics["degree"] = cfg.degree;
  res.diagnostics["interp_residual"] = resid;
  res.diagnostics["roots"] = static_cast<double>(roots.size());
  res.diagnostics["components"] = static_cast<double>(res.set.size());
  res.diagnostics["empty"] = res.set.empty() ? 1.0 : 0.0;
  res.diagnostics["unbounded"] = res.set.bounded() ? 0.0 : 1.0;
  return res;
}

InversionResult invert_approx(const StatProfile& profile, Method method, const ApproxConfig& cfg) {
  cfg.validate();
  InversionResult res;
  if (method == Method::CLR && profile.k == 1) {
    // LR = AR and its conditional law is chi-square(1) whatever T is: the test is AR.
    res = invert_ar(profile, cfg.alpha);
    res.method = Method::CLR;
    res.notes.push_back("k = 1: the CLR test coincides with AR; exact inversion used");
    res.diagnostics["draws"] = 0.0;
    return res;
  }
  if (method == Method::CLR || method == Method::CIL) {
    const ConditionalMc mc(profile, method, cfg);
    res = invert_conditional(mc_composite(mc), cfg, method);
    res.diagnostics["draws"] = cfg.mc.draws;
    res.diagnostics["seed"] = static_cast<double>(cfg.mc.seed);
  } else {
    res = invert_conditional(exact_composite(profile, method), cfg, method);
    res.diagnostics["draws"] = 0.0;
  }
  return res;
}

}  // namespace ivinv
