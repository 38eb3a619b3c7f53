#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "ivinv/polyalg.hpp"
#include "ivinv/stats.hpp"
#include "oracle.hpp"

using namespace ivinv;
using Catch::Approx;

namespace {

Poly from_roots(const std::vector<double>& roots, double lead = 1.0) {
  Poly p(std::vector<double>{lead});
  for (double r : roots) p = p * Poly(std::vector<double>{-r, 1.0});
  return p;
}

}  // namespace

TEST_CASE("poly evaluation matches power sums", "[polyalg]") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> c(15);
  for (double& v : c) v = u(g);
  const Poly p(c);
  for (int i = 0; i <= 50; ++i) {
    const double x = -1.0 + i / 25.0;
    double naive = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) naive += c[j] * std::pow(x, static_cast<double>(j));
    CHECK(p(x) == Approx(naive).epsilon(1e-12).margin(1e-14));
  }
  CHECK(Poly(std::vector<double>{1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(Poly(std::vector<double>{0.0}).is_zero());
}

TEST_CASE("real_roots examples", "[polyalg]") {
  const auto r = real_roots(Poly(std::vector<double>{-1, 0, 1}), {-2, 2});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == Approx(-1.0).margin(1e-9));
  CHECK(r[1] == Approx(1.0).margin(1e-9));

  std::vector<double> planted;
  for (int j = 1; j <= 10; ++j) planted.push_back(j / 10.0);
  const auto w = real_roots(from_roots(planted), {0, 2});
  REQUIRE(w.size() == 10);
  for (int j = 0; j < 10; ++j) CHECK(w[static_cast<std::size_t>(j)] == Approx(planted[static_cast<std::size_t>(j)]).margin(1e-6));

  CHECK(real_roots(Poly(std::vector<double>{1, 0, 1})).empty());
  CHECK(real_roots(Poly(std::vector<double>{3.0})).empty());
}

TEST_CASE("real_roots finds planted roots of random polynomials", "[polyalg]") {
  std::mt19937_64 g(19);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<int> nr(1, 12);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> roots;
    for (int i = nr(g); i > 0; --i) roots.push_back(u(g));
    Poly p = from_roots(roots, u(g) + 5.0);
    // Complex pairs pad the degree up to 20 without adding real roots.
    while (p.degree() + 2 <= 20 && u(g) > 0) p = p * Poly(std::vector<double>{1.0 + std::abs(u(g)), 0.3 * u(g), 1.0});
    const auto found = real_roots(p);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      double best = kInf, nearest_other = kInf;
      for (double f : found) best = std::min(best, std::abs(f - roots[i]));
      for (std::size_t j = 0; j < roots.size(); ++j)
        if (j != i) nearest_other = std::min(nearest_other, std::abs(roots[j] - roots[i]));
      // Near-coincident planted roots are ill-conditioned clusters; only separated ones are pinned.
      if (nearest_other > 1e-3) CHECK(best <= 1e-6);
    }
  }
}

TEST_CASE("fit_rational examples", "[polyalg]") {
  const RationalFn f = fit_rational([](double x) { return (1 + x * x) / (1 + 2 * x * x); }, 2, 2);
  REQUIRE(f.num.coeffs().size() == 3);
  REQUIRE(f.den.coeffs().size() == 3);
  CHECK(f.num.coeffs()[0] == Approx(1.0).margin(1e-10));
  CHECK(f.num.coeffs()[1] == Approx(0.0).margin(1e-10));
  CHECK(f.num.coeffs()[2] == Approx(1.0).margin(1e-10));
  CHECK(f.den.coeffs()[0] == Approx(1.0).margin(1e-10));
  CHECK(f.den.coeffs()[1] == Approx(0.0).margin(1e-10));
  CHECK(f.den.coeffs()[2] == Approx(2.0).margin(1e-10));

  const RationalFn c = fit_rational([](double) { return 7.0; }, 0, 0);
  CHECK(c.num(0.3) == Approx(7.0).epsilon(1e-12));
  CHECK(c.den(0.3) == Approx(1.0).epsilon(1e-12));

  // AR of a k = 2 dataset at degrees (4, 4), checked against the matrix form.
  const auto ss = oracle::design_ss(2, ErrorKind::Heteroskedastic, 10.0, 5);
  FitDiagnostics diag;
  const RationalFn ar = fit_rational([&](double b) { return ar_stat(ss, b); }, 4, 4, 0.0, &diag);
  CHECK(diag.max_residual <= 1e-8);
  for (double b : {-30.0, -2.0, 0.1, 0.7, 5.0, 80.0})
    CHECK(ar(b) == Approx(ar_stat(ss, b)).epsilon(1e-8));
}

TEST_CASE("fit_rational rejects non-rational evaluators", "[polyalg]") {
  CHECK_THROWS(fit_rational([](double x) { return std::exp(x / 5.0); }, 2, 2));
}

TEST_CASE("solve_rational_inequality examples", "[polyalg]") {
  const RationalFn sq{Poly(std::vector<double>{0, 0, 1}), Poly(std::vector<double>{1}), 0};
  const auto a = solve_rational_inequality(sq, 4.0);
  REQUIRE(a.size() == 1);
  CHECK(a.intervals()[0].lo == Approx(-2.0).margin(1e-9));
  CHECK(a.intervals()[0].hi == Approx(2.0).margin(1e-9));

  const RationalFn neg{Poly(std::vector<double>{0, 0, -1}), Poly(std::vector<double>{1}), 0};
  const auto b = solve_rational_inequality(neg, -4.0);
  REQUIRE(b.size() == 2);
  CHECK(b.unbounded_left());
  CHECK(b.unbounded_right());
  CHECK(b.intervals()[0].hi == Approx(-2.0).margin(1e-9));
  CHECK(b.intervals()[1].lo == Approx(2.0).margin(1e-9));

  const RationalFn sat{Poly(std::vector<double>{0, 0, 1}), Poly(std::vector<double>{1, 0, 1}), 0};
  CHECK(solve_rational_inequality(sat, 2.0).is_whole_line());
}

TEST_CASE("solve_rational_inequality agrees with a sign scan", "[polyalg]") {
  std::mt19937_64 g(23);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> deg(1, 6);
  const int m = 100000;
  const double lo = -50, hi = 50, h = (hi - lo) / m;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> pn(static_cast<std::size_t>(deg(g)) + 1), pd(static_cast<std::size_t>(deg(g)) + 1);
    std::vector<double> roots;
    for (int i = 0; i < static_cast<int>(pn.size()) - 1; ++i) roots.push_back(40 * u(g));
    const Poly num = from_roots(roots, u(g) > 0 ? 1.0 : -1.0);
    for (double& v : pd) v = u(g);
    pd[0] = 1.0 + std::abs(pd[0]);
    // Keep the denominator positive on the line so the scan sees no poles.
    const Poly den = Poly(pd) * Poly(pd) + Poly(std::vector<double>{0.5});
    const RationalFn f{num, den, 0};
    const double thr = 0.5 * u(g);
    const IntervalUnion s = solve_rational_inequality(f, thr, {lo, hi});
    std::vector<double> bounds;
    for (const auto& iv : s.intervals()) bounds.insert(bounds.end(), {iv.lo, iv.hi});
    int mismatches = 0;
    for (int i = 0; i <= m; ++i) {
      const double x = lo + i * h;
      if ((f(x) <= thr) == s.contains(x)) continue;
      double near = kInf;
      for (double b : bounds) near = std::min(near, std::abs(x - b));
      if (near > h) ++mismatches;
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("chebyshev nodes and interpolation", "[polyalg]") {
  const auto x = cheb_nodes(8);
  REQUIRE(x.size() == 9);
  CHECK(x.front() == -1.0);
  CHECK(x.back() == 1.0);
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] > x[i - 1]);

  const ChebSeries c3 = cheb_interpolate(ChebBasis::sample([](double t) { return t * t * t; }, 3));
  const Poly m3 = c3.to_monomial();
  REQUIRE(m3.degree() == 3);
  CHECK(m3.coeffs()[3] == Approx(1.0).margin(1e-12));
  CHECK(m3.coeffs()[0] == Approx(0.0).margin(1e-12));
  CHECK(m3.coeffs()[1] == Approx(0.0).margin(1e-12));
  CHECK(m3.coeffs()[2] == Approx(0.0).margin(1e-12));

  const ChebSeries cc = cheb_interpolate(ChebBasis::sample([](double) { return 2.5; }, 10));
  CHECK(cc.degree() == 0);
  CHECK(cc(0.3) == Approx(2.5));

  const ChebBasis ab = ChebBasis::sample([](double t) { return std::abs(t); }, 500);
  const ChebSeries ca = cheb_interpolate(ab);
  for (std::size_t i = 0; i < ab.nodes.size(); ++i)
    CHECK(ca(ab.nodes[i]) == Approx(ab.node_values[i]).margin(1e-10));
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = -1.0 + i / 5000.0;
    worst = std::max(worst, std::abs(ca(t) - std::abs(t)));
  }
  CHECK(worst <= 0.01);

  ChebBasis bad = ChebBasis::sample([](double) { return 1.0; }, 4);
  bad.node_values[2] = std::nan("");
  CHECK_THROWS(cheb_interpolate(bad));
}

TEST_CASE("cheb_roots examples", "[polyalg]") {
  const auto t2 = cheb_roots(ChebSeries(std::vector<double>{0, 0, 1}));
  REQUIRE(t2.size() == 2);
  CHECK(t2[0] == Approx(-std::sqrt(0.5)).margin(1e-9));
  CHECK(t2[1] == Approx(std::sqrt(0.5)).margin(1e-9));

  const ChebSeries s3 = cheb_interpolate(ChebBasis::sample([](double t) { return std::sin(3 * std::numbers::pi * t); }, 50));
  const auto r = cheb_roots(s3);
  REQUIRE(r.size() == 7);
  for (int j = 0; j < 7; ++j) CHECK(r[static_cast<std::size_t>(j)] == Approx((j - 3) / 3.0).margin(1e-6));

  const ChebSeries pos = cheb_interpolate(ChebBasis::sample([](double t) { return 2 + t * t; }, 4));
  CHECK(cheb_roots(pos).empty());
}

TEST_CASE("smooth_roots and dedupe", "[polyalg]") {
  const auto r = smooth_roots([](double t) { return std::cos(20 * t); }, -1, 1);
  CHECK(r.size() == 12);
  for (double x : r) CHECK(std::abs(std::cos(20 * x)) <= 1e-9);
  const auto d = dedupe_sorted({1.0, 1.0 + 1e-12, 0.5, 2.0});
  CHECK(d.size() == 3);
}
