#include "ivinv/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "ivinv/critvals.hpp"
#include "ivinv/errors.hpp"

namespace ivinv {

TslsFit tsls(const Dataset& data) {
  validate(data);
  const int n = data.n(), d = data.d();
  const Eigen::MatrixXd Zp = partial_out(data.X, data.Z);
  Eigen::MatrixXd Y(n, 2);
  Y.col(0) = data.y1;
  Y.col(1) = data.y2;
  const Eigen::MatrixXd Yp = partial_out(data.X, Y);
  const Eigen::VectorXd y1 = Yp.col(0), y2 = Yp.col(1);
  // Fitted first stage P_Z y2 through a least-squares solve.
  const Eigen::VectorXd pi = Zp.colPivHouseholderQr().solve(y2);
  const Eigen::VectorXd y2h = Zp * pi;
  const double qq = y2h.squaredNorm();
  if (!(qq > 1e-28 * std::max(1e-300, y2.squaredNorm())))
    throw NumericalError("first-stage fit is exactly zero; TSLS is undefined");
  TslsFit fit;
  fit.beta_hat = y2h.dot(y1) / y2h.dot(y2);
  const Eigen::VectorXd e = y1 - y2 * fit.beta_hat;
  const double dof = static_cast<double>(n - d - 1);
  const Eigen::VectorXd h = y2h.cwiseProduct(e);
  double meat = 0.0;
  switch (data.errors.kind) {
    case ErrorKind::Homoskedastic:
      fit.se = std::sqrt(e.squaredNorm() / dof / qq);
      return fit;
    case ErrorKind::Heteroskedastic:
      meat = n / dof * h.squaredNorm();
      break;
    case ErrorKind::Hac: {
      const int B = data.errors.bandwidth >= 0 ? data.errors.bandwidth : default_hac_bandwidth(n);
      meat = h.squaredNorm();
      for (int j = 1; j <= std::min(B, n - 1); ++j)
        meat += 2.0 * (1.0 - j / (B + 1.0)) * h.tail(n - j).dot(h.head(n - j));
      meat *= n / dof;
      break;
    }
    case ErrorKind::Clustered: {
      std::map<long, double> sums;
      for (int i = 0; i < n; ++i) sums[data.errors.cluster_id[static_cast<std::size_t>(i)]] += h(i);
      const double g = static_cast<double>(sums.size());
      for (const auto& [id, s] : sums) meat += s * s;
      meat *= g / (g - 1.0) * (n - 1.0) / dof;
      break;
    }
  }
  fit.se = std::sqrt(std::max(0.0, meat)) / qq;
  if (!(fit.se > 0.0)) throw NumericalError("TSLS standard error is not positive");
  return fit;
}

InversionResult invert_grid(const GridEvaluator& ev, GridKind grid, const TslsFit& fit, int points, double alpha) {
  if (points < 3) throw ConfigError("grid inversion needs at least 3 points");
  std::vector<double> betas(static_cast<std::size_t>(points));
  if (grid == GridKind::Even) {
    const double lo = fit.beta_hat - 2.0 * fit.se, hi = fit.beta_hat + 2.0 * fit.se;
    for (int i = 0; i < points; ++i) betas[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1.0);
  } else {
    const std::vector<double> t = cheb_nodes(points - 1);
    for (int i = 0; i < points; ++i) betas[static_cast<std::size_t>(i)] = Compactification::inverse(t[static_cast<std::size_t>(i)]);
  }
  InversionResult res;
  res.method = grid == GridKind::Even ? Method::GRID_EVEN : Method::GRID_CHEB;
  res.alpha = alpha;
  res.exact = false;
  int skipped = 0;
  std::vector<signed char> acc(betas.size(), -1);  // -1 skipped, 0 reject, 1 accept
  for (std::size_t i = 0; i < betas.size(); ++i) {
    try {
      const auto [stat, crit] = ev(betas[i]);
      if (std::isnan(stat) || std::isnan(crit)) throw NumericalError("NaN");
      acc[i] = stat <= crit ? 1 : 0;
    } catch (const std::exception& e) {
      ++skipped;
      res.notes.push_back("node " + std::to_string(i) + " skipped: " + e.what());
    }
  }
  std::vector<Interval> out;
  std::size_t i = 0;
  while (i < betas.size()) {
    if (acc[i] != 1) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < betas.size() && acc[j + 1] != 0) ++j;  // skipped nodes do not break a run
    while (acc[j] != 1) --j;
    Interval iv{betas[i], betas[j]};
    if (grid == GridKind::Even) {
      if (i == 0) iv.lo = -kInf;
      if (j + 1 == betas.size()) iv.hi = kInf;
    }
    out.push_back(iv);
    i = j + 1;
  }
  res.set = IntervalUnion(std::move(out));
  res.diagnostics["points"] = points;
  res.diagnostics["skipped"] = skipped;
  res.diagnostics["components"] = static_cast<double>(res.set.size());
  res.diagnostics["empty"] = res.set.empty() ? 1.0 : 0.0;
  res.diagnostics["unbounded"] = res.set.bounded() ? 0.0 : 1.0;
  if (grid == GridKind::Even) {
    res.diagnostics["grid_lo"] = betas.front();
    res.diagnostics["grid_hi"] = betas.back();
  }
  return res;
}

InversionResult tratio_interval(const TslsFit& fit, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  InversionResult res;
  res.method = Method::TRATIO;
  res.alpha = alpha;
  res.exact = true;
  res.set = IntervalUnion::single(fit.beta_hat - z * fit.se, fit.beta_hat + z * fit.se);
  res.diagnostics["beta_hat"] = fit.beta_hat;
  res.diagnostics["se"] = fit.se;
  res.diagnostics["half_width"] = z * fit.se;
  return res;
}

GridEvaluator exact_grid_evaluator(const StatProfile& profile, Method method, double alpha) {
  const StatProfile* p = &profile;
  const int k = profile.k;
  switch (method) {
    case Method::AR: {
      const double c = chi2_quantile(k, alpha);
      return [p, c](double b) { return std::pair{p->direct_theta(Compactification::forward(b)).ar, c}; };
    }
    case Method::LM: {
      const double c = chi2_quantile(1, alpha);
      return [p, c](double b) { return std::pair{p->direct_theta(Compactification::forward(b)).lm, c}; };
    }
    case Method::CQLR: {
      auto kappa = std::make_shared<CqlrCvf>(CvfSpec{k, alpha});
      return [p, kappa](double b) {
        const DirectStats d = p->direct_theta(Compactification::forward(b));
        return std::pair{d.qlr, (*kappa)(d.rank)};
      };
    }
    default:
      throw ConfigError("no pointwise evaluator for method " + method_name(method));
  }
}

}  // namespace ivinv
