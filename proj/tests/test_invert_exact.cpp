#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "ivinv/invert_exact.hpp"
#include "oracle.hpp"

using namespace ivinv;
using Catch::Approx;

namespace {

SufficientStats zero_ss(int k) {
  SufficientStats ss = oracle::random_ss(k, 2);
  ss.R.setZero();
  return ss;
}

void require_match(const IntervalUnion& exact, const SufficientStats& ss, oracle::Stat stat, double alpha, int m,
                   const oracle::KappaTable* table = nullptr) {
  const auto scan = oracle::scan_exact(ss, stat, alpha, m, table);
  const auto rep = oracle::match_sets(exact, scan, oracle::direct_excess(ss, stat, alpha));
  INFO(rep.why);
  CHECK(rep.ok);
}

// Roots of h on [a, b] from a dense scan with bisection at sign changes.
std::vector<double> scan_roots(const std::function<double(double)>& h, double a, double b, int m) {
  std::vector<double> out;
  double prev = a, hp = h(a);
  if (hp == 0.0) out.push_back(a);
  for (int i = 1; i <= m; ++i) {
    const double x = a + (b - a) * i / m, hx = h(x);
    if (hx == 0.0) out.push_back(x);
    else if ((hp < 0) != (hx < 0) && hp != 0.0) out.push_back(oracle::bisect(h, prev, x));
    prev = x;
    hp = hx;
  }
  return out;
}

RankDomainFns synthetic(std::function<double(double)> g, std::function<double(double)> dg) {
  RankDomainFns f;
  f.g = std::move(g);
  f.dg = std::move(dg);
  f.kappa = [](double r) { return std::array<double, 2>{std::exp(-r) + 4.0, -std::exp(-r)}; };
  return f;
}

// Synthetic profile with psi = pi theta: r = 2 - cos psi and QLR = Q(r) planted.
StatProfile planted_profile() {
  StatProfile p;
  p.k = 2;
  p.whiten = Eigen::Matrix2d::Identity();
  // Q(r) = (r - 2)^3 - 0.75 (r - 2) + 5 with r - 2 = -cos psi; LM = 0.5.
  // AR = r + Q - LM r / Q as num / den with den = Q.
  auto Q = [](double psi) {
    const double c = -std::cos(psi);
    return c * c * c - 0.75 * c + 5.0;
  };
  auto r = [](double psi) { return 2.0 - std::cos(psi); };
  p.rank = {TrigPoly::fit(r, 1), TrigPoly::fit([](double) { return 1.0; }, 0)};
  p.lm = {TrigPoly::fit([](double) { return 0.5; }, 0), TrigPoly::fit([](double) { return 1.0; }, 0)};
  p.ar = {TrigPoly::fit([&](double s) { return Q(s) * (r(s) + Q(s)) - 0.5 * r(s); }, 6), TrigPoly::fit(Q, 3)};
  return p;
}

}  // namespace

TEST_CASE("method names round trip", "[invert_exact]") {
  for (Method m : {Method::AR, Method::LM, Method::CQLR, Method::CLR, Method::CIL, Method::TRATIO, Method::GRID_EVEN,
                   Method::GRID_CHEB, Method::APPROX})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_method("grid-even") == Method::GRID_EVEN);
  CHECK(parse_method("cqlr") == Method::CQLR);
  CHECK_THROWS(parse_method("wald"));
}

TEST_CASE("AR inversion examples", "[invert_exact]") {
  CHECK(invert_ar(build_profile(zero_ss(3)), 0.05).set.is_whole_line());

  // Large unstructured R: AR stays above the critical value everywhere.
  const SufficientStats far = oracle::random_ss(5, 13, 10.0);
  const auto e = invert_ar(build_profile(far), 0.05);
  CHECK(e.set.empty());
  CHECK(e.diagnostics.at("empty") == 1.0);

  for (int s = 0; s < 6; ++s) {
    const SufficientStats ss = oracle::design_ss(10, oracle::error_kind(s), 8.0, 2000 + s);
    const auto r = invert_ar(build_profile(ss), 0.05);
    CHECK(r.diagnostics.at("boundary_residual") <= 1e-6);
    require_match(r.set, ss, oracle::Stat::AR, 0.05, 100000);
  }
}

TEST_CASE("LM inversion examples", "[invert_exact]") {
  CHECK(invert_lm(build_profile(zero_ss(2)), 0.05).set.is_whole_line());
  for (int s = 0; s < 50; ++s) {
    const SufficientStats ss = oracle::design_ss(1, oracle::error_kind(s), 2.0, 2100 + s);
    const StatProfile p = build_profile(ss);
    const auto a = invert_ar(p, 0.05), l = invert_lm(p, 0.05);
    CHECK(oracle::theta_symdiff(a.set, l.set) <= 1e-7);
    CHECK(a.set.size() == l.set.size());
  }
  std::size_t most = 0;
  for (int s = 0; s < 6; ++s) {
    const SufficientStats ss = oracle::design_ss(10, oracle::error_kind(s), 3.0, 2200 + s);
    const auto r = invert_lm(build_profile(ss), 0.05);
    CHECK(r.diagnostics.at("boundary_residual") <= 1e-6);
    most = std::max(most, r.set.size());
    require_match(r.set, ss, oracle::Stat::LM, 0.05, 100000);
  }
  CHECK(most >= 2);
}

TEST_CASE("partition into monotone pieces", "[invert_exact]") {
  for (int s = 0; s < 4; ++s) {
    const SufficientStats ss = oracle::design_ss(2, ErrorKind::Homoskedastic, 5.0, 2300 + s);
    const StatProfile p = build_profile(ss);
    const auto pieces = partition_injective(p);
    REQUIRE(!pieces.empty());
    CHECK(pieces.front().theta_lo == -1.0);
    CHECK(pieces.back().theta_hi == 1.0);
    // Breakpoints match sign changes of a finite-difference scan of r.
    std::vector<double> fd_breaks;
    const int m = 1000000;
    double prev_r = p.rank_theta(-1.0), prev_d = 0.0;
    for (int i = 1; i <= m; ++i) {
      const double t = -1.0 + 2.0 * i / m, r = p.rank_theta(t), d = r - prev_r;
      if (i > 1 && (d > 0) != (prev_d > 0) && d != 0.0 && prev_d != 0.0) fd_breaks.push_back(t - 1.0 / m);
      prev_r = r;
      prev_d = d;
    }
    REQUIRE(fd_breaks.size() + 1 == pieces.size());
    for (std::size_t i = 0; i < fd_breaks.size(); ++i) CHECK(std::abs(pieces[i].theta_hi - fd_breaks[i]) <= 4.0 / m);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& pc = pieces[i];
      CHECK(pc.r_lo == Approx(p.rank_theta(pc.theta_lo)).epsilon(1e-10));
      CHECK(pc.r_hi == Approx(p.rank_theta(pc.theta_hi)).epsilon(1e-10));
      if (i + 1 < pieces.size()) CHECK(pc.r_hi == Approx(pieces[i + 1].r_lo).epsilon(1e-10));
      // Strict monotonicity at 8 interior probes.
      double last = pc.r_lo;
      for (int j = 1; j <= 8; ++j) {
        const double v = p.rank_theta(pc.theta_lo + (pc.theta_hi - pc.theta_lo) * j / 9.0);
        CHECK((pc.increasing ? v > last : v < last));
        last = v;
      }
    }
  }
  const auto one = partition_injective(build_profile(zero_ss(2)));
  REQUIRE(one.size() == 1);
  CHECK(one[0].beta_lo == -kInf);
  CHECK(one[0].beta_hi == kInf);
}

TEST_CASE("shape breaks", "[invert_exact]") {
  for (int s = 0; s < 4; ++s) {
    const StatProfile p = build_profile(oracle::design_ss(3, ErrorKind::Homoskedastic, 6.0, 2400 + s));
    for (const auto& pc : partition_injective(p)) CHECK(shape_breaks(pc, p).empty());
  }
  const StatProfile p = planted_profile();
  MonotonePiece pc;
  pc.theta_lo = 0.0;
  pc.theta_hi = 1.0;
  pc.r_lo = 1.0;
  pc.r_hi = 3.0;
  pc.increasing = true;
  const auto br = shape_breaks(pc, p);
  REQUIRE(br.size() == 3);
  CHECK(br[0] == Approx(1.0 / 3.0).margin(1e-8));
  CHECK(br[1] == Approx(0.5).margin(1e-8));
  CHECK(br[2] == Approx(2.0 / 3.0).margin(1e-8));
}

TEST_CASE("rank-domain solver cases", "[invert_exact]") {
  const CvfSpec spec{5, 0.05};
  CqlrCvf kappa(spec);
  RankDomainFns lin;
  const double lam = kappa(1.0) + 0.01;
  lin.g = [lam](double r) { return lam - 0.01 * r; };
  lin.dg = [](double) { return -0.01; };
  lin.kappa = [&kappa](double r) {
    const auto d = kappa.derivs(r);
    return std::array<double, 2>{d[0], d[1]};
  };
  const auto one = solve_rank_domain(0.0, 2.0, GShape::DecreasingConvex, lin);
  REQUIRE(one.size() == 1);
  const double ref = oracle::bisect([&](double r) { return kappa(r) - lin.g(r); }, 0.0, 2.0);
  CHECK(one[0] == Approx(ref).margin(1e-9));

  // Two crossings with kappa = e^{-r} + 4 and a linear or convex decreasing g.
  for (double curv : {0.0, 0.02}) {
    auto g = [curv](double r) { return 4.9 - 0.5 * r + curv * r * r; };
    auto fns = synthetic(g, [curv](double r) { return -0.5 + 2 * curv * r; });
    const auto roots = solve_rank_domain(0.0, 5.0, GShape::DecreasingConvex, fns);
    const auto want = scan_roots([&](double r) { return std::exp(-r) + 4.0 - g(r); }, 0.0, 5.0, 10000000);
    REQUIRE(want.size() == 2);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Approx(want[0]).margin(1e-8));
    CHECK(roots[1] == Approx(want[1]).margin(1e-8));
  }
  // Concave decreasing g: h convex, up to two roots.
  {
    auto g = [](double r) { return 4.9 - 0.45 * r - 0.01 * r * r; };
    auto fns = synthetic(g, [](double r) { return -0.45 - 0.02 * r; });
    const auto roots = solve_rank_domain(0.0, 5.0, GShape::DecreasingConcave, fns);
    const auto want = scan_roots([&](double r) { return std::exp(-r) + 4.0 - g(r); }, 0.0, 5.0, 1000000);
    REQUIRE(roots.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(roots[i] == Approx(want[i]).margin(1e-8));
  }
  // Increasing g: at most one root.
  {
    auto g = [](double r) { return 3.5 + 0.3 * r; };
    auto fns = synthetic(g, [](double) { return 0.3; });
    const auto roots = solve_rank_domain(0.0, 5.0, GShape::Increasing, fns);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == Approx(oracle::bisect([&](double r) { return std::exp(-r) + 4.0 - g(r); }, 0.0, 5.0)).margin(1e-8));
  }
  // Tangency at the left endpoint is reported once.
  {
    auto g = [](double r) { return 5.0 - 0.5 * r; };
    auto fns = synthetic(g, [](double) { return -0.5; });
    const auto roots = solve_rank_domain(0.0, 5.0, GShape::DecreasingConvex, fns);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Approx(0.0).margin(1e-9));
    CHECK(roots[1] == Approx(oracle::bisect([&](double r) { return std::exp(-r) + 4.0 - g(r); }, 0.5, 5.0)).margin(1e-8));
  }
}

TEST_CASE("CQLR inversion: homoskedastic identities", "[invert_exact]") {
  bool saw_whole = false, saw_bounded = false;
  for (int s = 0; s < 20; ++s) {
    const SufficientStats ss = oracle::design_ss(5, ErrorKind::Homoskedastic, s % 2 ? 0.5 : 25.0, 2500 + s);
    const auto r = invert_cqlr(build_profile(ss), CvfSpec{5, 0.05});
    const IntervalUnion want = oracle::homoskedastic_cqlr_oracle(ss, 0.05);
    // lambda_max < c_k suffices for the whole line; r >= lambda_min makes it not necessary.
    if (oracle::lambda_max(ss) < chi2_quantile(5, 0.05)) CHECK(r.set.is_whole_line());
    CHECK(r.set.is_whole_line() == want.is_whole_line());
    saw_whole |= r.set.is_whole_line();
    saw_bounded |= r.set.bounded();
    REQUIRE(want.size() == r.set.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto& a = want.intervals()[i];
      const auto& b = r.set.intervals()[i];
      CHECK((std::isinf(a.lo) ? a.lo == b.lo : std::abs(a.lo - b.lo) <= 1e-7 * (1 + std::abs(a.lo))));
      CHECK((std::isinf(a.hi) ? a.hi == b.hi : std::abs(a.hi - b.hi) <= 1e-7 * (1 + std::abs(a.hi))));
    }
  }
  CHECK(saw_whole);
  CHECK(saw_bounded);
}

TEST_CASE("CQLR inversion matches a dense scan under HAC errors", "[invert_exact]") {
  const oracle::KappaTable table(3, 0.05);
  for (int s = 0; s < 6; ++s) {
    const SufficientStats ss = oracle::design_ss(3, ErrorKind::Hac, 2.0 + 3 * s, 2600 + s);
    const auto r = invert_cqlr(build_profile(ss), CvfSpec{3, 0.05});
    CHECK(r.diagnostics.at("boundary_residual") <= 1e-6);
    require_match(r.set, ss, oracle::Stat::CQLR, 0.05, 100000, &table);
  }
}

TEST_CASE("k = 1: AR, LM and CQLR sets coincide", "[invert_exact]") {
  for (int s = 0; s < 20; ++s) {
    const StatProfile p = build_profile(oracle::design_ss(1, oracle::error_kind(s), 3.0, 2700 + s));
    const auto a = invert_ar(p, 0.05), q = invert_cqlr(p, CvfSpec{1, 0.05});
    CHECK(oracle::theta_symdiff(a.set, q.set) <= 1e-7);
  }
}

TEST_CASE("theta-set assembly handles touches", "[invert_exact]") {
  // Accept |theta| <= 0.2 and a tangency at 0.5.
  auto accept = [](double t) { return std::abs(t) <= 0.2; };
  auto touch = [](double t) { return std::abs(t - 0.5) < 1e-12; };
  const IntervalUnion u = assemble_theta_set({-0.2, 0.2, 0.5}, accept, touch);
  REQUIRE(u.size() == 2);
  CHECK(u.intervals()[1].lo == u.intervals()[1].hi);
}
