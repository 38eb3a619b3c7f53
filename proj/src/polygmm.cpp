#include "ivinv/polygmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "ivinv/critvals.hpp"
#include "ivinv/errors.hpp"

namespace ivinv {

PolyMomentModel normal_mean_model() {
  PolyMomentModel m;
  m.name = "normal-mean";
  m.k = 2;
  m.d = 2;
  m.coefficients = [](const Eigen::RowVectorXd& x, int) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 3);
    c(0, 0) = -x(0);
    c(0, 1) = 1.0;
    c(1, 0) = 1.0 - x(0) * x(0);
    c(1, 2) = 1.0;
    return c;
  };
  return m;
}

PolyMomentModel linear_mean_model() {
  PolyMomentModel m;
  m.name = "linear-mean";
  m.k = 1;
  m.d = 1;
  m.coefficients = [](const Eigen::RowVectorXd& x, int) {
    Eigen::MatrixXd c(1, 2);
    c << -x(0), 1.0;
    return c;
  };
  return m;
}

PolyMomentModel model_from_json(const std::string& json_text, const std::vector<std::string>& columns) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("moment model: invalid JSON: ") + e.what());
  }
  struct Term {
    double coef;
    int col;
    int power;
  };
  PolyMomentModel m;
  m.name = j.value("name", std::string("custom"));
  m.centered = j.value("centered", false);
  m.anchor = j.value("anchor", 0.0);
  if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
    throw ConfigError("moment model: 'components' must be a non-empty array");
  std::vector<std::vector<std::vector<Term>>> comps;
  int d = 0;
  for (const auto& comp : j["components"]) {
    if (!comp.is_array() || comp.empty()) throw ConfigError("moment model: each component is an array of powers");
    std::vector<std::vector<Term>> powers;
    for (const auto& terms : comp) {
      std::vector<Term> ts;
      for (const auto& t : terms) {
        Term term{t.value("coef", 1.0), -1, t.value("power", 1)};
        if (t.contains("col")) {
          const std::string name = t["col"].get<std::string>();
          const auto it = std::find(columns.begin(), columns.end(), name);
          if (it == columns.end()) throw ConfigError("moment model: unknown column '" + name + "'");
          term.col = static_cast<int>(it - columns.begin());
        }
        ts.push_back(term);
      }
      powers.push_back(std::move(ts));
    }
    d = std::max(d, static_cast<int>(powers.size()) - 1);
    comps.push_back(std::move(powers));
  }
  m.k = static_cast<int>(comps.size());
  m.d = std::max(d, 1);
  if (j.contains("d")) {
    const int declared = j["d"].get<int>();
    if (declared < d) throw ConfigError("moment model: declared degree is below the component degree");
    m.d = declared;
  }
  const int dd = m.d;
  m.coefficients = [comps, dd](const Eigen::RowVectorXd& x, int) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(comps.size()), dd + 1);
    for (std::size_t a = 0; a < comps.size(); ++a)
      for (std::size_t l = 0; l < comps[a].size(); ++l)
        for (const Term& t : comps[a][l])
          c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l)) +=
              t.coef * (t.col < 0 ? 1.0 : std::pow(x(t.col), t.power));
    return c;
  };
  return m;
}

PolyArStat::PolyArStat(const PolyMomentModel& model, const Eigen::MatrixXd& data, int regime)
    : k_(model.k), d_(model.d), n_(static_cast<int>(data.rows())), centered_(model.centered) {
  if (n_ <= k_) throw ConfigError("polynomial GMM needs more observations than moment components");
  gbar_ = Eigen::MatrixXd::Zero(k_, d_ + 1);
  w_.assign(static_cast<std::size_t>(2 * d_ + 1), Eigen::MatrixXd::Zero(k_, k_));
  for (int i = 0; i < n_; ++i) {
    const Eigen::MatrixXd c = model.coefficients(data.row(i), regime);
    if (c.rows() != k_ || c.cols() != d_ + 1) throw ConfigError("moment coefficients have the wrong shape");
    gbar_ += c;
    for (int l = 0; l <= d_; ++l)
      for (int m = 0; m <= d_; ++m) w_[static_cast<std::size_t>(l + m)] += c.col(l) * c.col(m).transpose();
  }
  gbar_ /= n_;
  for (auto& w : w_) w /= n_;
}

double PolyArStat::operator()(double theta) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k_);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k_, k_);
  double tp = 1.0;
  for (int p = 0; p <= 2 * d_; ++p, tp *= theta) {
    if (p <= d_) g += tp * gbar_.col(p);
    W += tp * w_[static_cast<std::size_t>(p)];
  }
  if (centered_) W -= g * g.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(W);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * std::max(1e-300, W.diagonal().maxCoeff())))
    throw NumericalError("moment weight matrix is singular at theta = " + std::to_string(theta));
  return n_ * g.dot(ldlt.solve(g));
}

InversionResult invert_poly_ar(const PolyMomentModel& model, const Eigen::MatrixXd& data, double alpha,
                               std::vector<RationalFn>* fitted) {
  if (!std::is_sorted(model.regimes.begin(), model.regimes.end()))
    throw ConfigError("regime breakpoints must be ascending");
  const double crit = chi2_quantile(model.k, alpha);
  const int deg = 2 * model.d * model.k;
  InversionResult res;
  res.method = Method::AR;
  res.alpha = alpha;
  res.diagnostics["critical_value"] = crit;
  res.diagnostics["degree"] = deg;
  const int nreg = static_cast<int>(model.regimes.size()) + 1;
  IntervalUnion all;
  double worst = 0.0, worst_cert = 0.0;
  for (int reg = 0; reg < nreg; ++reg) {
    const PolyArStat stat(model, data, reg);
    // Held-out relative residual on the compact scale around the anchor.
    auto held_out = [&](const RationalFn& f) {
      double w = 0.0;
      for (int j = 0; j < 64; ++j) {
        const double u = -1.0 + 2.0 * (j + 0.37) / 64.0;
        const double t = model.anchor + std::tan(0.5 * std::numbers::pi * u);
        const double v = stat(t);
        w = std::max(w, std::abs(f(t) - v) / (1.0 + std::abs(v)));
      }
      return w;
    };
    // The declared bound can exceed the true degree; an over-specified fit carries an
    // arbitrary common factor whose real roots would be spurious poles. The smallest
    // degree that reproduces the statistic is unique up to scale.
    RationalFn rf;
    double fit_worst = kInf;
    std::string last_error = "no degree tried";
    for (int m = 0; m <= deg; ++m) {
      try {
        RationalFn cand = fit_rational([&](double t) { return stat(t); }, m, m, model.anchor);
        const double w = held_out(cand);
        if (w <= 1e-8) {
          rf = cand;
          fit_worst = w;
          break;
        }
        last_error = "held-out residual " + std::to_string(w) + " at degree " + std::to_string(m);
      } catch (const std::runtime_error& e) {
        last_error = e.what();
      }
    }
    if (!std::isfinite(fit_worst))
      throw NumericalError("generalized AR is not rational of degree <= " + std::to_string(deg) +
                           ": degree bound violated (" + last_error + ")");
    worst = std::max(worst, fit_worst);
    double& fd = res.diagnostics["fitted_degree"];
    fd = std::max({fd, static_cast<double>(rf.num.degree()), static_cast<double>(rf.den.degree())});
    Domain dom;
    if (reg > 0) dom.lo = model.regimes[static_cast<std::size_t>(reg - 1)];
    if (reg + 1 < nreg) dom.hi = model.regimes[static_cast<std::size_t>(reg)];
    const IntervalUnion part = solve_rational_inequality(rf, crit, dom);
    for (const auto& iv : part.intervals())
      for (double b : {iv.lo, iv.hi})
        if (std::isfinite(b) && b != dom.lo && b != dom.hi)
          worst_cert = std::max(worst_cert, std::abs(stat(b) - crit) / (1.0 + crit));
    all = set_union(all, part);
    if (fitted) fitted->push_back(rf);
  }
  res.set = all;
  res.diagnostics["fit_residual"] = worst;
  res.diagnostics["boundary_residual"] = worst_cert;
  res.diagnostics["components"] = static_cast<double>(res.set.size());
  res.diagnostics["empty"] = res.set.empty() ? 1.0 : 0.0;
  res.diagnostics["unbounded"] = res.set.bounded() ? 0.0 : 1.0;
  return res;
}

}  // namespace ivinv
