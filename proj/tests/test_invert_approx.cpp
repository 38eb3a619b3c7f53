#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "ivinv/errors.hpp"
#include "ivinv/invert_approx.hpp"
#include "oracle.hpp"

using namespace ivinv;
using Catch::Approx;

namespace {

ApproxConfig approx_cfg(int degree = 500) {
  ApproxConfig c;
  c.degree = degree;
  c.mc.draws = 2000;
  return c;
}

double set_distance(const IntervalUnion& a, const IntervalUnion& b) {
  if (a.empty() != b.empty()) return 1.0;
  return normalized_distance(hausdorff(a, b));
}

}  // namespace

TEST_CASE("compactification identities", "[invert_approx]") {
  for (double t : {-0.999, -0.5, 0.0, 0.25, 0.9}) {
    CHECK(Compactification::forward(Compactification::inverse(t)) == Approx(t).margin(1e-14));
    CHECK(Compactification::theta_to_psi(t) == Approx(std::numbers::pi * t).margin(1e-14));
  }
  CHECK(Compactification::forward(kInf) == 1.0);
  CHECK(Compactification::forward(-kInf) == -1.0);
  CHECK(Compactification::inverse(1.0) == kInf);
  CHECK(Compactification::inverse(-1.0) == -kInf);
  CHECK(Compactification::forward(1.0) == Approx(0.5).margin(1e-15));
}

TEST_CASE("compactify_stat limits and interior values", "[invert_approx]") {
  const SufficientStats ss = oracle::design_ss(3, ErrorKind::Heteroskedastic, 4.0, 3001);
  const CompactStat r = compactify_stat([&](double b) { return rank_stat(ss, b); });
  CHECK(r.limit_lo == Approx(r.limit_hi).epsilon(1e-6));
  CHECK(r.limit_hi == Approx(direct_stats(ss, kInf).rank).epsilon(1e-6));
  const CompactStat a = compactify_stat([&](double b) { return ar_stat(ss, b); });
  for (double t : {-0.7, 0.0, 0.4}) CHECK(a.eval(t) == Approx(ar_stat(ss, oracle::beta_of(t))).epsilon(1e-12));
  CHECK(a.eval(1.0) == a.limit_hi);
  CHECK_THROWS_AS(compactify_stat([](double b) { return 0.5 * b; }), ConfigError);
}

TEST_CASE("exact composites are chi-square CDFs of the statistic", "[invert_approx]") {
  const StatProfile p = build_profile(oracle::design_ss(4, ErrorKind::Homoskedastic, 4.0, 3002));
  const Composite ar = exact_composite(p, Method::AR), lm = exact_composite(p, Method::LM);
  for (double t : {-0.6, 0.1, 0.8}) {
    CHECK(ar.value(t) == Approx(chi2_cdf(4, p.ar_theta(t))).margin(1e-14));
    CHECK(lm.value(t) == Approx(chi2_cdf(1, p.lm_theta(t))).margin(1e-14));
  }
  CHECK_THROWS_AS(exact_composite(p, Method::CLR), ConfigError);
}

TEST_CASE("invert_conditional on synthetic composites", "[invert_approx]") {
  const ApproxConfig cfg = approx_cfg(64);
  Composite zero{[](double) { return 0.0; }, {}};
  CHECK(invert_conditional(zero, cfg, Method::APPROX).set.is_whole_line());
  Composite one{[](double) { return 1.0; }, {}};
  CHECK(invert_conditional(one, cfg, Method::APPROX).set.empty());

  // Accept |theta| <= 0.95 / 1.2.
  Composite v{[](double t) { return 1.2 * std::abs(t); }, {}};
  const InversionResult r = invert_conditional(v, approx_cfg(500), Method::APPROX);
  REQUIRE(r.set.size() == 1);
  CHECK(oracle::theta_of(r.set.intervals()[0].lo) == Approx(-0.95 / 1.2).margin(1e-6));
  CHECK(oracle::theta_of(r.set.intervals()[0].hi) == Approx(0.95 / 1.2).margin(1e-6));
  CHECK(r.reliable);
  CHECK_FALSE(r.exact);

  // Accepted ends join across beta = inf.
  Composite w{[](double t) { return 1.0 - 0.5 * std::abs(t); }, {}};
  const InversionResult u = invert_conditional(w, approx_cfg(128), Method::APPROX);
  REQUIRE(u.set.size() == 2);
  CHECK(u.set.unbounded_left());
  CHECK(u.set.unbounded_right());
}

TEST_CASE("invert_conditional flags a jagged composite as unreliable", "[invert_approx]") {
  Composite jag{[](double t) { return std::sin(400.0 * t) > 0 ? 1.0 : 0.0; }, {}};
  const InversionResult r = invert_conditional(jag, approx_cfg(16), Method::APPROX);
  CHECK_FALSE(r.reliable);
  CHECK(r.diagnostics.at("interp_residual") > 0.05);
}

TEST_CASE("approximate AR, LM and CQLR sets match the exact ones", "[invert_approx]") {
  const ApproxConfig cfg = approx_cfg(500);
  int close = 0, total = 0;
  for (int s = 0; s < 12; ++s) {
    const int k = 2 + s % 4;
    const StatProfile p = build_profile(oracle::design_ss(k, oracle::error_kind(s), 1.0 + s, 3100 + s));
    for (Method m : {Method::AR, Method::LM, Method::CQLR}) {
      const InversionResult ex = m == Method::AR ? invert_ar(p, 0.05)
                                 : m == Method::LM ? invert_lm(p, 0.05)
                                                   : invert_cqlr(p, CvfSpec{k, 0.05});
      const InversionResult ap = invert_approx(p, m, cfg);
      ++total;
      if (set_distance(ex.set, ap.set) <= 1e-3) ++close;
      else WARN("design " << s << " " << method_name(m) << ": " << ex.set.to_string() << " vs " << ap.set.to_string());
    }
  }
  CHECK(close >= total - 1);
}

TEST_CASE("doubling the degree does not move a converged set", "[invert_approx]") {
  const StatProfile p = build_profile(oracle::design_ss(3, ErrorKind::Heteroskedastic, 5.0, 3200));
  const auto a = invert_approx(p, Method::AR, approx_cfg(250));
  const auto b = invert_approx(p, Method::AR, approx_cfg(500));
  CHECK(set_distance(a.set, b.set) <= 1e-4);
}

TEST_CASE("Monte Carlo composites", "[invert_approx]") {
  const StatProfile p = build_profile(oracle::design_ss(3, ErrorKind::Heteroskedastic, 3.0, 3300));
  const ApproxConfig cfg = approx_cfg(40);
  const ConditionalMc clr(p, Method::CLR, cfg);
  for (double t : {-0.5, 0.2}) {
    CHECK(clr.observed(t) == Approx(lr_stat_theta(p, t)).margin(1e-7));
    const auto sims = clr.simulated(t);
    CHECK(sims.size() == 2000);
    double below = 0;
    for (double v : sims) below += v <= clr.observed(t);
    CHECK(clr.composite(t) == Approx(below / 2000.0).margin(1e-12));
    CHECK(clr.simulated(t, true).size() == 8000);
  }
  const auto r1 = invert_approx(p, Method::CLR, cfg);
  const auto r2 = invert_approx(p, Method::CLR, cfg);
  CHECK(r1.set == r2.set);
  CHECK(r1.diagnostics.at("draws") == 2000);

  const ConditionalMc cil(p, Method::CIL, cfg);
  CHECK(cil.observed(0.3) == Approx(il_log_normalized(p, 0.3)).margin(1e-5));
  CHECK(invert_approx(p, Method::CIL, cfg).set.valid());
}

TEST_CASE("approximate inversion input errors", "[invert_approx]") {
  const StatProfile p1 = build_profile(oracle::design_ss(1, ErrorKind::Heteroskedastic, 3.0, 3400));
  CHECK_THROWS_AS(invert_approx(p1, Method::CIL, approx_cfg(40)), ConfigError);
  CHECK_THROWS_AS(invert_approx(p1, Method::AR, approx_cfg(4)), ConfigError);
  ApproxConfig bad = approx_cfg();
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
