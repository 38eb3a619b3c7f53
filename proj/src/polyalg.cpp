#include "ivinv/polyalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ivinv {

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Poly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return Poly(std::move(d));
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
  return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0) * b; }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Poly(std::move(c));
}

Poly operator*(double s, const Poly& a) {
  std::vector<double> c = a.c_;
  for (auto& v : c) v *= s;
  return Poly(std::move(c));
}

// ---------------------------------------------------------------------------
// Eigenvalue helpers

namespace {

// Parlett-Reinsch balancing with radix 2; leaves eigenvalues unchanged.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  bool done = false;
  for (int sweep = 0; sweep < 100 && !done; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / 2) {
        c *= 2;
        r /= 2;
        f *= 2;
      }
      while (c >= r * 2) {
        c /= 2;
        r *= 2;
        f /= 2;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

Eigen::VectorXcd eigenvalues(Eigen::MatrixXd m, const char* what) {
  balance(m);
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string("eigenvalue solver did not converge for ") + what);
  return es.eigenvalues();
}

}  // namespace

std::vector<double> dedupe_sorted(std::vector<double> xs, double tol) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i + 1;
    double sum = xs[i];
    while (j < xs.size() && xs[j] - xs[i] <= tol * (1.0 + std::abs(xs[i]))) sum += xs[j++];
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// real_roots

namespace {

double polish_root(const Poly& p, const Poly& dp, double x) {
  double fx = p(x);
  for (int it = 0; it < 8 && fx != 0.0; ++it) {
    const double d = dp(x);
    if (d == 0.0) break;
    const double xn = x - fx / d;
    const double fn = p(xn);
    if (!(std::abs(fn) < std::abs(fx))) break;
    x = xn;
    fx = fn;
  }
  // Tighten with bisection when a sign bracket is available.
  for (double h : {1e-12, 1e-10, 1e-8}) {
    const double w = h * (1.0 + std::abs(x));
    double lo = x - w, hi = x + w;
    double flo = p(lo), fhi = p(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) != (fhi < 0)) {
      for (int it = 0; it < 80 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = p(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
  }
  return x;
}

}  // namespace

std::vector<double> real_roots(const Poly& p, Domain domain) {
  if (p.is_zero()) throw std::invalid_argument("real_roots: zero polynomial");
  std::vector<double> c = p.coeffs();
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  while (c.size() > 1 && std::abs(c.back()) < 1e-12 * cmax) c.pop_back();

  std::vector<double> roots;
  std::size_t zeros = 0;
  while (zeros + 1 < c.size() && c[zeros] == 0.0) ++zeros;
  if (zeros > 0) {
    roots.push_back(0.0);
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(zeros));
  }
  const int n = static_cast<int>(c.size()) - 1;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (n >= 2) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    const Eigen::VectorXcd ev = eigenvalues(comp, "companion matrix");
    for (const auto& z : ev)
      if (std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  const Poly dp = p.derivative();
  for (auto& r : roots) r = polish_root(p, dp, r);
  roots = dedupe_sorted(std::move(roots), 1e-8);
  std::vector<double> out;
  for (double r : roots)
    if (r >= domain.lo && r <= domain.hi) out.push_back(r);
  return out;
}

// ---------------------------------------------------------------------------
// fit_rational

RationalFn fit_rational(const std::function<double(double)>& f, int deg_num, int deg_den,
                        double anchor, FitDiagnostics* diag) {
  if (deg_num < 0 || deg_den < 0) throw std::invalid_argument("fit_rational: negative degree");
  const int np = deg_num + 1, nq = deg_den + 1;
  const int m = std::max(2 * (deg_num + deg_den + 1), 1);
  double s = std::max(10.0, 2.0 * std::abs(anchor));
  FitDiagnostics d;
  for (int attempt = 1; attempt <= 8; ++attempt, s *= 2.0) {
    d.attempts = attempt;
    d.scale = s;
    const double ta = anchor / s;
    // Eliminate the pivot q coefficient with the largest anchor weight.
    int jstar = 0;
    for (int j = 1; j < nq; ++j)
      if (std::abs(std::pow(ta, j)) > std::abs(std::pow(ta, jstar))) jstar = j;
    const double wstar = std::pow(ta, jstar);
    const int nu = np + nq - 1;
    Eigen::MatrixXd a(m, nu);
    Eigen::VectorXd rhs(m);
    bool finite = true;
    for (int i = 0; i < m; ++i) {
      const double t = std::cos(std::numbers::pi * (i + 0.5) / m);
      const double fv = f(t * s);
      if (!std::isfinite(fv)) {
        finite = false;
        break;
      }
      const double w = 1.0 / (1.0 + std::abs(fv));
      const double tj_star = std::pow(t, jstar);
      int col = 0;
      for (int j = 0; j < nq; ++j) {
        if (j == jstar) continue;
        a(i, col++) = w * fv * (std::pow(t, j) - tj_star * std::pow(ta, j) / wstar);
      }
      for (int j = 0; j < np; ++j) a(i, col++) = -w * std::pow(t, j);
      rhs(i) = -w * fv * tj_star / wstar;
    }
    if (!finite) continue;
    Eigen::VectorXd colnorm = a.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < colnorm.size(); ++j) {
      if (colnorm(j) == 0.0) colnorm(j) = 1.0;
      a.col(j) /= colnorm(j);
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nu);
    if (nu > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-13);
      u = svd.solve(rhs);
      const auto& sv = svd.singularValues();
      d.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : kInf;
      u = u.cwiseQuotient(colnorm);
    }
    std::vector<double> qs(static_cast<std::size_t>(nq)), ps(static_cast<std::size_t>(np));
    int col = 0;
    double acc = 0.0;
    for (int j = 0; j < nq; ++j) {
      if (j == jstar) continue;
      qs[static_cast<std::size_t>(j)] = u(col++);
      acc += qs[static_cast<std::size_t>(j)] * std::pow(ta, j);
    }
    qs[static_cast<std::size_t>(jstar)] = (1.0 - acc) / wstar;
    for (int j = 0; j < np; ++j) ps[static_cast<std::size_t>(j)] = u(col++);
    for (int j = 0; j < nq; ++j) qs[static_cast<std::size_t>(j)] /= std::pow(s, j);
    for (int j = 0; j < np; ++j) ps[static_cast<std::size_t>(j)] /= std::pow(s, j);
    RationalFn out{Poly(ps), Poly(qs), anchor};

    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double t = 0.97 * std::cos(std::numbers::pi * (i + 0.37) / 64.0);
      const double x = t * s;
      const double fv = f(x);
      const double qv = out.den(x);
      const double err = (qv == 0.0) ? kInf : std::abs(out.num(x) / qv - fv) / (1.0 + std::abs(fv));
      worst = std::max(worst, err);
    }
    d.max_residual = worst;
    if (worst <= 1e-8) {
      if (diag) *diag = d;
      return out;
    }
  }
  if (diag) *diag = d;
  throw std::runtime_error("fit_rational: held-out residual check failed (max residual " +
                           std::to_string(d.max_residual) + ", condition " +
                           std::to_string(d.condition) + ")");
}

// ---------------------------------------------------------------------------
// solve_rational_inequality

IntervalUnion solve_rational_inequality(const RationalFn& f, double threshold, Domain domain) {
  const Poly g = f.num - threshold * f.den;
  std::vector<double> cand;
  if (!g.is_zero()) {
    double gmax = 0.0;
    for (double v : g.coeffs()) gmax = std::max(gmax, std::abs(v));
    double scale = 0.0;
    for (double v : f.num.coeffs()) scale = std::max(scale, std::abs(v));
    for (double v : f.den.coeffs()) scale = std::max(scale, std::abs(threshold * v));
    if (gmax > 1e-14 * scale) {
      auto r = real_roots(g, domain);
      cand.insert(cand.end(), r.begin(), r.end());
    }
  }
  if (f.den.degree() >= 1) {
    auto r = real_roots(f.den, domain);
    cand.insert(cand.end(), r.begin(), r.end());
  }
  cand = dedupe_sorted(std::move(cand), 1e-12);
  std::vector<double> pts;
  pts.push_back(domain.lo);
  for (double c : cand)
    if (c > domain.lo && c < domain.hi) pts.push_back(c);
  pts.push_back(domain.hi);

  double far = 1.0;
  for (double c : cand) far = std::max(far, 2.0 * std::abs(c) + 1.0);
  auto accept = [&](double x) { return f(x) <= threshold; };
  std::vector<Interval> parts;
  const std::size_t nseg = pts.size() - 1;
  std::vector<char> seg_ok(nseg, 0);
  for (std::size_t i = 0; i < nseg; ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    double probe;
    if (std::isinf(lo) && std::isinf(hi)) probe = 0.0;
    else if (std::isinf(lo)) probe = hi - far;
    else if (std::isinf(hi)) probe = lo + far;
    else probe = 0.5 * (lo + hi);
    seg_ok[i] = accept(probe) ? 1 : 0;
    if (seg_ok[i]) parts.push_back({lo, hi});
  }
  // Tangential touches with both neighbours rejected become singletons.
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (seg_ok[i - 1] || seg_ok[i]) continue;
    const double x = pts[i];
    const double dv = f.den(x);
    if (dv != 0.0 && f.num(x) / dv <= threshold + 1e-9 * (1.0 + std::abs(threshold)))
      parts.push_back({x, x});
  }
  return IntervalUnion(std::move(parts));
}

// ---------------------------------------------------------------------------
// Chebyshev machinery

std::vector<double> cheb_nodes(int n) {
  if (n <= 0) return {0.0};
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) x[static_cast<std::size_t>(j)] = -std::cos(std::numbers::pi * j / n);
  x.front() = -1.0;
  x.back() = 1.0;
  if (n % 2 == 0) x[static_cast<std::size_t>(n / 2)] = 0.0;
  return x;
}

ChebBasis ChebBasis::sample(const std::function<double(double)>& f, int degree) {
  ChebBasis b;
  b.degree = degree;
  b.nodes = cheb_nodes(degree);
  b.node_values.reserve(b.nodes.size());
  for (double x : b.nodes) b.node_values.push_back(f(x));
  return b;
}

std::vector<double> cheb_coeffs_from_values(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n < 0) return {};
  if (n == 0) return {values[0]};
  std::vector<double> costab(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < 2 * n; ++i) costab[static_cast<std::size_t>(i)] = std::cos(std::numbers::pi * i / n);
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  // values[j] sits at -cos(pi j / n) = cos(pi (n - j) / n).
  for (int m = 0; m <= n; ++m) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * values[static_cast<std::size_t>(n - i)] *
             costab[static_cast<std::size_t>((static_cast<long>(m) * i) % (2 * n))];
    }
    c[static_cast<std::size_t>(m)] = 2.0 * acc / n;
  }
  c[0] *= 0.5;
  c[static_cast<std::size_t>(n)] *= 0.5;
  return c;
}

double ChebSeries::operator()(double x) const {
  if (c_.empty()) return 0.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c_.size() - 1; j >= 1; --j) {
    const double b0 = 2.0 * x * b1 - b2 + c_[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c_[0];
}

Poly ChebSeries::to_monomial() const {
  std::vector<double> out(c_.size(), 0.0);
  std::vector<double> tprev{1.0}, tcur{0.0, 1.0};
  for (std::size_t j = 0; j < c_.size(); ++j) {
    const std::vector<double>& t = (j == 0) ? tprev : tcur;
    for (std::size_t i = 0; i < t.size() && i < out.size(); ++i) out[i] += c_[j] * t[i];
    if (j >= 1) {
      std::vector<double> tnext(tcur.size() + 1, 0.0);
      for (std::size_t i = 0; i < tcur.size(); ++i) tnext[i + 1] += 2.0 * tcur[i];
      for (std::size_t i = 0; i < tprev.size(); ++i) tnext[i] -= tprev[i];
      tprev = std::move(tcur);
      tcur = std::move(tnext);
    }
  }
  return Poly(std::move(out));
}

ChebSeries cheb_interpolate(const ChebBasis& samples) {
  for (double v : samples.node_values)
    if (!std::isfinite(v)) throw std::invalid_argument("cheb_interpolate: non-finite sample");
  std::vector<double> c = cheb_coeffs_from_values(samples.node_values);
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  const double tol = 4.0 * 2.2e-16 * static_cast<double>(c.size()) * cmax;
  while (c.size() > 1 && std::abs(c.back()) <= tol) c.pop_back();
  return ChebSeries(std::move(c));
}

std::vector<double> colleague_roots(const std::vector<double>& coeffs, double imag_tol) {
  std::vector<double> c = coeffs;
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0) return {};
  while (c.size() > 1 && std::abs(c.back()) <= 1e-15 * cmax) c.pop_back();
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<double> roots;
  if (n <= 0) return roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m(0, 1) = 1.0;
    for (int j = 1; j < n - 1; ++j) {
      m(j, j - 1) = 0.5;
      m(j, j + 1) = 0.5;
    }
    m(n - 1, n - 2) = 0.5;
    for (int j = 0; j < n; ++j) m(n - 1, j) -= c[static_cast<std::size_t>(j)] / (2.0 * c.back());
    const Eigen::VectorXcd ev = eigenvalues(m, "colleague matrix");
    for (const auto& z : ev)
      if (std::abs(z.imag()) <= imag_tol && std::abs(z.real()) <= 1.0 + 1e-8) roots.push_back(z.real());
  }
  std::vector<double> out;
  for (double r : roots)
    if (std::abs(r) <= 1.0 + 1e-8) out.push_back(std::clamp(r, -1.0, 1.0));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double refine_root(const std::function<double(double)>& f, double x, double a, double b) {
  for (double h : {1e-13, 1e-11, 1e-9, 1e-7}) {
    const double w = h * (b - a);
    double lo = std::max(a, x - w), hi = std::min(b, x + w);
    if (!(lo < hi)) continue;
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) != (fhi < 0)) {
      boost::uintmax_t iters = 100;
      auto r = boost::math::tools::toms748_solve(
          f, lo, hi, flo, fhi, [](double u, double v) { return std::abs(u - v) <= 4e-16 * (1 + std::abs(u)); },
          iters);
      return 0.5 * (r.first + r.second);
    }
  }
  return x;
}

void smooth_roots_rec(const std::function<double(double)>& f, double a, double b, int depth,
                      const SmoothRootOptions& opt, std::vector<double>& out, int& budget) {
  --budget;
  const int n = opt.local_degree;
  const std::vector<double> t = cheb_nodes(n);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = f(0.5 * (a + b) + 0.5 * (b - a) * t[i]);
    if (!std::isfinite(v[i])) throw std::runtime_error("smooth_roots: non-finite function value");
  }
  std::vector<double> c = cheb_coeffs_from_values(v);
  double cmax = 0.0;
  for (double x : c) cmax = std::max(cmax, std::abs(x));
  if (cmax == 0.0) return;
  double tail = 0.0;
  for (int j = n - 3; j <= n; ++j) tail = std::max(tail, std::abs(c[static_cast<std::size_t>(j)]));
  double mid_band = 0.0;
  for (int j = n / 2; j < n - 3; ++j) mid_band = std::max(mid_band, std::abs(c[static_cast<std::size_t>(j)]));
  // A flat tail well below the peak is rounding noise, not missing resolution.
  const bool plateau = tail <= 1e-8 * cmax && mid_band <= 100.0 * tail;
  if (tail > opt.chop_tol * cmax && tail > opt.noise_floor && !plateau && depth < opt.max_depth && budget > 1) {
    const double mid = a + 0.5041 * (b - a);
    smooth_roots_rec(f, a, mid, depth + 1, opt, out, budget);
    smooth_roots_rec(f, mid, b, depth + 1, opt, out, budget);
    return;
  }
  try {
    for (double r : colleague_roots(c, 1e-6)) out.push_back(0.5 * (a + b) + 0.5 * (b - a) * r);
  } catch (const std::runtime_error&) {
    // Unresolved leaf: bracket the sign changes among the samples.
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double lo = 0.5 * (a + b) + 0.5 * (b - a) * t[i], hi = 0.5 * (a + b) + 0.5 * (b - a) * t[i + 1];
      if (v[i] == 0.0) {
        out.push_back(lo);
      } else if ((v[i] < 0.0) != (v[i + 1] < 0.0) && v[i + 1] != 0.0) {
        boost::uintmax_t iters = 100;
        auto r = boost::math::tools::toms748_solve(
            f, lo, hi, v[i], v[i + 1], [](double u, double w) { return std::abs(u - w) <= 4e-16 * (1 + std::abs(u)); },
            iters);
        out.push_back(0.5 * (r.first + r.second));
      }
    }
  }
}

}  // namespace

std::vector<double> smooth_roots(const std::function<double(double)>& f, double a, double b,
                                 const SmoothRootOptions& opt) {
  std::vector<double> raw;
  int budget = opt.max_intervals;
  smooth_roots_rec(f, a, b, 0, opt, raw, budget);
  for (auto& x : raw) x = refine_root(f, x, a, b);
  std::sort(raw.begin(), raw.end());
  std::vector<double> out;
  const double tol = 1e-13 * (b - a);
  for (double x : raw)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

std::vector<double> cheb_roots(const ChebSeries& p) {
  const auto& c = p.coeffs();
  bool nonzero = false;
  for (double v : c) nonzero = nonzero || v != 0.0;
  if (!nonzero) throw std::invalid_argument("cheb_roots: zero series");
  auto f = [&p](double x) { return p(x); };
  std::vector<double> roots;
  if (p.degree() <= 64) {
    roots = colleague_roots(c, 1e-6);
    for (auto& r : roots) r = refine_root(f, r, -1.0, 1.0);
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double x : roots)
      if (out.empty() || x - out.back() > 1e-13) out.push_back(x);
    return out;
  }
  SmoothRootOptions opt;
  opt.local_degree = 96;
  return smooth_roots(f, -1.0, 1.0, opt);
}

}  // namespace ivinv
