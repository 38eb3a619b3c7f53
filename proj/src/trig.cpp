#include "ivinv/trig.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace ivinv {

TrigPoly::TrigPoly(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty()) a_.push_back(0.0);
  b_.resize(a_.size(), 0.0);
  b_[0] = 0.0;
}

TrigPoly TrigPoly::from_samples(const std::vector<double>& values, int degree) {
  return from_samples(std::vector<long double>(values.begin(), values.end()), degree);
}

TrigPoly TrigPoly::from_samples(const std::vector<long double>& values, int degree) {
  const int n = static_cast<int>(values.size());
  if (n < 2 * degree + 1) throw std::invalid_argument("TrigPoly::from_samples: too few samples");
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<long double> a(static_cast<std::size_t>(degree) + 1, 0.0L), b(a.size(), 0.0L);
  for (int i = 0; i < n; ++i) {
    const long double psi = -pi + 2.0L * pi * i / n;
    const long double v = values[static_cast<std::size_t>(i)];
    a[0] += v;
    for (int j = 1; j <= degree; ++j) {
      a[static_cast<std::size_t>(j)] += v * std::cos(j * psi);
      b[static_cast<std::size_t>(j)] += v * std::sin(j * psi);
    }
  }
  std::vector<double> ad(a.size()), bd(b.size());
  ad[0] = static_cast<double>(a[0] / n);
  for (std::size_t j = 1; j < a.size(); ++j) {
    ad[j] = static_cast<double>(a[j] * 2.0L / n);
    bd[j] = static_cast<double>(b[j] * 2.0L / n);
  }
  TrigPoly out(std::move(ad), std::move(bd));
  if (n == 2 * degree + 1) out.samples_ = values;
  return out;
}

TrigPoly TrigPoly::fit(const std::function<double(double)>& f, int degree) {
  const int n = 2 * degree + 1;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f(-std::numbers::pi + 2.0 * std::numbers::pi * i / n);
  return from_samples(v, degree);
}

double TrigPoly::operator()(double psi) const {
  if (!samples_.empty()) {
    // Odd node count: weights (-1)^i / sin((psi - psi_i) / 2).
    const int n = static_cast<int>(samples_.size());
    const long double pi = std::numbers::pi_v<long double>;
    long double num = 0.0L, den = 0.0L;
    for (int i = 0; i < n; ++i) {
      const long double sh = std::sin(0.5L * (psi - (-pi + 2.0L * pi * i / n)));
      if (sh == 0.0L) return static_cast<double>(samples_[static_cast<std::size_t>(i)]);
      const long double w = (i % 2 ? -1.0L : 1.0L) / sh;
      num += w * samples_[static_cast<std::size_t>(i)];
      den += w;
    }
    return static_cast<double>(num / den);
  }
  const std::complex<double> z(std::cos(psi), std::sin(psi));
  std::complex<double> zj(1.0, 0.0);
  double acc = a_[0];
  for (std::size_t j = 1; j < a_.size(); ++j) {
    zj *= z;
    acc += a_[j] * zj.real() + b_[j] * zj.imag();
  }
  return acc;
}

std::array<double, 3> TrigPoly::derivs(double psi) const {
  const std::complex<double> z(std::cos(psi), std::sin(psi));
  std::complex<double> zj(1.0, 0.0);
  std::array<double, 3> out{a_[0], 0.0, 0.0};
  for (std::size_t j = 1; j < a_.size(); ++j) {
    zj *= z;
    const double c = zj.real(), s = zj.imag(), jj = static_cast<double>(j);
    out[0] += a_[j] * c + b_[j] * s;
    out[1] += jj * (b_[j] * c - a_[j] * s);
    out[2] -= jj * jj * (a_[j] * c + b_[j] * s);
  }
  return out;
}

double TrigPoly::max_abs_coeff() const {
  double m = 0.0;
  for (std::size_t j = 0; j < a_.size(); ++j) m = std::max({m, std::abs(a_[j]), std::abs(b_[j])});
  return m;
}

namespace {
using CPoly = std::vector<std::complex<double>>;

CPoly cmul(const CPoly& p, const CPoly& q) {
  CPoly r(p.size() + q.size() - 1, {0.0, 0.0});
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

CPoly cpow(const CPoly& p, int e) {
  CPoly r{{1.0, 0.0}};
  for (int i = 0; i < e; ++i) r = cmul(r, p);
  return r;
}
}  // namespace

Poly TrigPoly::to_beta_poly(int m) const {
  if (m < degree()) throw std::invalid_argument("TrigPoly::to_beta_poly: m below degree");
  const CPoly plus{{1.0, 0.0}, {0.0, 1.0}}, minus{{1.0, 0.0}, {0.0, -1.0}};
  std::vector<double> out(static_cast<std::size_t>(2 * m) + 1, 0.0);
  for (int j = 0; j <= degree(); ++j) {
    const std::complex<double> cj = (j == 0) ? std::complex<double>(a_[0], 0.0)
                                             : std::complex<double>(a_[static_cast<std::size_t>(j)],
                                                                    -b_[static_cast<std::size_t>(j)]);
    if (cj == 0.0) continue;
    const CPoly term = cmul(cpow(plus, m + j), cpow(minus, m - j));
    for (std::size_t i = 0; i < term.size(); ++i) out[i] += (cj * term[i]).real();
  }
  return Poly(std::move(out));
}

TrigPoly operator-(const TrigPoly& p, const TrigPoly& q) {
  const std::size_t n = std::max(p.a_.size(), q.a_.size());
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (std::size_t j = 0; j < p.a_.size(); ++j) {
    a[j] += p.a_[j];
    b[j] += p.b_[j];
  }
  for (std::size_t j = 0; j < q.a_.size(); ++j) {
    a[j] -= q.a_[j];
    b[j] -= q.b_[j];
  }
  return TrigPoly(std::move(a), std::move(b));
}

TrigPoly operator*(double s, const TrigPoly& p) {
  std::vector<double> a = p.a_, b = p.b_;
  for (auto& v : a) v *= s;
  for (auto& v : b) v *= s;
  return TrigPoly(std::move(a), std::move(b));
}

std::array<double, 3> TrigRational::derivs(double psi) const {
  const auto n = num.derivs(psi);
  const auto d = den.derivs(psi);
  const double f = n[0] / d[0];
  const double f1 = (n[1] - f * d[1]) / d[0];
  const double f2 = (n[2] - 2.0 * f1 * d[1] - f * d[2]) / d[0];
  return {f, f1, f2};
}

RationalFn TrigRational::to_rational_fn() const {
  const int m = std::max(num.degree(), den.degree());
  Poly p = num.to_beta_poly(m), q = den.to_beta_poly(m);
  const double q0 = q(0.0);
  if (q0 == 0.0) throw std::runtime_error("TrigRational::to_rational_fn: denominator vanishes at 0");
  return RationalFn{(1.0 / q0) * p, (1.0 / q0) * q, 0.0};
}

int TrigRational::beta_degree() const { return 2 * std::max(num.degree(), den.degree()); }

double Compactification::forward(double beta) {
  if (beta == kInf) return 1.0;
  if (beta == -kInf) return -1.0;
  return 2.0 / std::numbers::pi * std::atan(beta);
}

double Compactification::inverse(double theta) {
  if (theta >= 1.0) return kInf;
  if (theta <= -1.0) return -kInf;
  return std::tan(0.5 * std::numbers::pi * theta);
}

double Compactification::theta_to_psi(double theta) { return std::numbers::pi * theta; }

}  // namespace ivinv
