#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

namespace ivinv {

struct QuadResult {
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N, class F>
std::pair<std::array<double, N>, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<double, N> k{}, g{};
  const std::array<double, N> fc = f(c);
  for (std::size_t i = 0; i < N; ++i) {
    k[i] = kWgk[7] * fc[i];
    g[i] = kWg[3] * fc[i];
  }
  for (int j = 0; j < 7; ++j) {
    const std::array<double, N> f1 = f(c - h * kXgk[j]);
    const std::array<double, N> f2 = f(c + h * kXgk[j]);
    for (std::size_t i = 0; i < N; ++i) {
      k[i] += kWgk[j] * (f1[i] + f2[i]);
      if (j % 2 == 1) g[i] += kWg[j / 2] * (f1[i] + f2[i]);
    }
  }
  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    k[i] *= h;
    err = std::max(err, std::abs(k[i] - h * g[i]));
  }
  return {k, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature for an N-vector integrand.
/// The error target is max(abs_tol, rel_tol * max_i |I_i|), measured as the
/// largest componentwise Kronrod-Gauss discrepancy summed over panels.
template <std::size_t N, class F>
std::array<double, N> integrate_gk15(F f, double a, double b, double abs_tol, double rel_tol,
                                     int max_intervals = 2000, QuadResult* info = nullptr) {
  struct Panel {
    double a, b, err;
    std::array<double, N> val;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  std::priority_queue<Panel> heap;
  auto [v0, e0] = detail::gk15<N>(f, a, b);
  heap.push({a, b, e0, v0});
  std::array<double, N> total = v0;
  double total_err = e0;
  int count = 1;
  auto target = [&]() {
    double m = 0.0;
    for (double t : total) m = std::max(m, std::abs(t));
    return std::max(abs_tol, rel_tol * m);
  };
  while (total_err > target() && count < max_intervals) {
    Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      heap.push(p);
      break;
    }
    auto [v1, e1] = detail::gk15<N>(f, p.a, mid);
    auto [v2, e2] = detail::gk15<N>(f, mid, p.b);
    for (std::size_t i = 0; i < N; ++i) total[i] += v1[i] + v2[i] - p.val[i];
    total_err += e1 + e2 - p.err;
    heap.push({p.a, mid, e1, v1});
    heap.push({mid, p.b, e2, v2});
    ++count;
  }
  // Re-sum from panels to shed accumulated update rounding.
  std::array<double, N> sum{};
  double err = 0.0;
  while (!heap.empty()) {
    const Panel& p = heap.top();
    for (std::size_t i = 0; i < N; ++i) sum[i] += p.val[i];
    err += p.err;
    heap.pop();
  }
  if (info) {
    info->abs_error = err;
    info->intervals = count;
    double m = 0.0;
    for (double t : sum) m = std::max(m, std::abs(t));
    info->converged = err <= std::max(abs_tol, rel_tol * m);
  }
  return sum;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace ivinv
