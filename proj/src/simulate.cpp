#include "ivinv/simulate.hpp"

#include <cmath>
#include <random>

#include "ivinv/errors.hpp"

namespace ivinv {

Dataset simulate_dataset(const DesignSpec& design, std::uint64_t seed) {
  const int n = design.n, k = design.k;
  if (n < k + 3 || k < 1) throw ConfigError("simulation design needs k >= 1 and n >= k + 3");
  if (!(std::abs(design.rho) < 1.0)) throw ConfigError("simulation design needs |rho| < 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double pi = std::sqrt(std::max(design.strength, 0.0) / (static_cast<double>(n) * k));
  const double c = std::sqrt(1.0 - design.rho * design.rho);

  Dataset data;
  data.Z.resize(n, k);
  data.y1.resize(n);
  data.y2.resize(n);
  Eigen::MatrixXd E(n, 2);  // (u, v2) before heteroskedastic scaling
  const bool hac = design.errors == ErrorKind::Hac;
  const bool clustered = design.errors == ErrorKind::Clustered;
  const int g = std::max(2, design.clusters);
  Eigen::MatrixXd cz = Eigen::MatrixXd::Zero(g, k), ce = Eigen::MatrixXd::Zero(g, 2);
  if (clustered) {
    for (int j = 0; j < g; ++j) {
      for (int l = 0; l < k; ++l) cz(j, l) = nd(gen);
      const double e1 = nd(gen), e2 = nd(gen);
      ce(j, 0) = e1;
      ce(j, 1) = design.rho * e1 + c * e2;
    }
  }
  const double a = design.ar_coef, sa = std::sqrt(1.0 - a * a);
  std::vector<long> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int cl = static_cast<int>(static_cast<long long>(i) * g / n);
    ids[static_cast<std::size_t>(i)] = cl;
    for (int l = 0; l < k; ++l) {
      const double z = nd(gen);
      if (hac && i > 0) data.Z(i, l) = a * data.Z(i - 1, l) + sa * z;
      else if (clustered) data.Z(i, l) = std::sqrt(0.5) * (cz(cl, l) + z);
      else data.Z(i, l) = z;
    }
    const double e1 = nd(gen), e2 = nd(gen);
    double u = e1, v = design.rho * e1 + c * e2;
    if (hac && i > 0) {
      u = a * E(i - 1, 0) + sa * u;
      v = a * E(i - 1, 1) + sa * v;
    } else if (clustered) {
      u = std::sqrt(0.5) * (ce(cl, 0) + u);
      v = std::sqrt(0.5) * (ce(cl, 1) + v);
    }
    E(i, 0) = u;
    E(i, 1) = v;
  }
  for (int i = 0; i < n; ++i) {
    double scale = 1.0;
    if (design.errors == ErrorKind::Heteroskedastic)
      scale = std::sqrt(0.5 + 0.5 * data.Z(i, 0) * data.Z(i, 0));
    const double u = scale * E(i, 0), v = scale * E(i, 1);
    data.y2(i) = pi * data.Z.row(i).sum() + v;
    data.y1(i) = design.beta * data.y2(i) + u;
  }
  if (design.intercept) {
    data.X = Eigen::MatrixXd::Ones(n, 1);
  } else {
    data.X.resize(n, 0);
  }
  switch (design.errors) {
    case ErrorKind::Homoskedastic: data.errors = ErrorSpec::homoskedastic(); break;
    case ErrorKind::Heteroskedastic: data.errors = ErrorSpec::heteroskedastic(); break;
    case ErrorKind::Hac: data.errors = ErrorSpec::hac(); break;
    case ErrorKind::Clustered: data.errors = ErrorSpec::clustered(ids); break;
  }
  return data;
}

}  // namespace ivinv
