#include <algorithm>
#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "ivinv/baselines.hpp"
#include "ivinv/errors.hpp"
#include "ivinv/simulate.hpp"
#include "oracle.hpp"

using namespace ivinv;
using Catch::Approx;

namespace {

Dataset design(int k, ErrorKind e, double strength, std::uint64_t seed) {
  DesignSpec d;
  d.k = k;
  d.errors = e;
  d.strength = strength;
  return simulate_dataset(d, seed);
}

GridEvaluator accept_if(std::function<bool(double)> f) {
  return [f](double b) { return std::pair{f(b) ? 0.0 : 2.0, 1.0}; };
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("TSLS with the regressor as its own instrument is OLS", "[baselines]") {
  Dataset d = design(1, ErrorKind::Homoskedastic, 10.0, 4001);
  d.Z = d.y2;
  const TslsFit f = tsls(d);
  const Eigen::VectorXd y1 = d.y1.array() - d.y1.mean(), y2 = d.y2.array() - d.y2.mean();
  const double b = y2.dot(y1) / y2.squaredNorm();
  const Eigen::VectorXd e = y1 - b * y2;
  CHECK(f.beta_hat == Approx(b).epsilon(1e-12));
  CHECK(f.se == Approx(std::sqrt(e.squaredNorm() / (d.n() - 2) / y2.squaredNorm())).epsilon(1e-10));
}

TEST_CASE("TSLS scales with the outcome", "[baselines]") {
  for (ErrorKind e : {ErrorKind::Homoskedastic, ErrorKind::Heteroskedastic, ErrorKind::Hac, ErrorKind::Clustered}) {
    Dataset d = design(3, e, 10.0, 4002);
    d.y1 = d.y1 + 0.7 * d.y2;
    const TslsFit a = tsls(d);
    d.y1 *= 2.0;
    const TslsFit b = tsls(d);
    CHECK(b.beta_hat == Approx(2.0 * a.beta_hat).epsilon(1e-12));
    CHECK(b.se == Approx(2.0 * a.se).epsilon(1e-12));
  }
}

TEST_CASE("t-ratio interval examples", "[baselines]") {
  const TslsFit f{0.0, 1.0};
  const auto a = tratio_interval(f, 0.05);
  CHECK(a.set.intervals()[0].hi == Approx(1.959964).margin(1e-6));
  CHECK(a.set.intervals()[0].lo == Approx(-1.959964).margin(1e-6));
  const auto b = tratio_interval(f, 0.3174);
  CHECK(b.set.intervals()[0].hi == Approx(1.0).margin(1e-3));
  for (int s = 0; s < 20; ++s) {
    const auto r = tratio_interval(tsls(design(2 + s % 3, oracle::error_kind(s), 0.5 + s, 4100 + s)), 0.05);
    CHECK(r.set.size() == 1);
    CHECK(r.set.bounded());
  }
  CHECK_THROWS_AS(tratio_interval(f, 0.0), ConfigError);
}

TEST_CASE("grid inversion conventions", "[baselines]") {
  const TslsFit f{0.0, 1.0};
  CHECK(invert_grid(accept_if([](double) { return true; }), GridKind::Even, f, 41, 0.05).set.is_whole_line());
  CHECK(invert_grid(accept_if([](double) { return true; }), GridKind::Cheb, f, 41, 0.05).set.is_whole_line());

  // An accepted end node of the even grid extends the set to infinity.
  const auto half = invert_grid(accept_if([](double b) { return b <= 0.01; }), GridKind::Even, f, 401, 0.05);
  REQUIRE(half.set.size() == 1);
  CHECK(half.set.unbounded_left());
  CHECK(half.set.intervals()[0].hi == Approx(0.01).margin(1e-9));

  // A component narrower than the spacing falls between nodes.
  const auto narrow = invert_grid(accept_if([](double b) { return b >= 0.3 && b <= 0.3001; }), GridKind::Even, f, 501, 0.05);
  CHECK(narrow.set.empty());

  // A throwing node is skipped and does not split a run.
  GridEvaluator flaky = [](double b) {
    if (std::abs(b) < 1e-12) throw NumericalError("boom");
    return std::pair{std::abs(b) <= 0.5 ? 0.0 : 2.0, 1.0};
  };
  const auto sk = invert_grid(flaky, GridKind::Even, f, 41, 0.05);
  CHECK(sk.diagnostics.at("skipped") == 1);
  CHECK(sk.set.size() == 1);
  CHECK_THROWS_AS(invert_grid(flaky, GridKind::Even, f, 2, 0.05), ConfigError);
}

TEST_CASE("Chebyshev grid endpoints lie within one node gap of the exact set", "[baselines]") {
  const int points = 201;
  int checked = 0;
  for (int s = 0; s < 10; ++s) {
    const Dataset d = design(3, oracle::error_kind(s), 8.0, 4200 + s);
    const StatProfile p = build_profile(compute_sufficient_stats(d));
    const auto ex = invert_ar(p, 0.05);
    const auto gr = invert_grid(exact_grid_evaluator(p, Method::AR, 0.05), GridKind::Cheb, tsls(d), points, 0.05);
    bool wide = ex.set.size() == gr.set.size();
    for (const auto& iv : ex.set.intervals()) wide &= oracle::theta_of(iv.hi) - oracle::theta_of(iv.lo) > 0.1;
    if (!wide) continue;
    ++checked;
    const double gap = std::numbers::pi / (points - 1);
    for (std::size_t i = 0; i < ex.set.size(); ++i) {
      CHECK(std::abs(oracle::theta_of(ex.set.intervals()[i].lo) - oracle::theta_of(gr.set.intervals()[i].lo)) <= gap);
      CHECK(std::abs(oracle::theta_of(ex.set.intervals()[i].hi) - oracle::theta_of(gr.set.intervals()[i].hi)) <= gap);
    }
  }
  CHECK(checked >= 5);
}

TEST_CASE("Chebyshev grid is no worse than the even grid", "[baselines]") {
  std::vector<double> de, dc;
  // Strong endogeneity over a range of strengths: AR sets often outgrow beta_hat +- 2 se.
  const double strengths[] = {1.0, 2.0, 5.0, 10.0, 20.0};
  for (int s = 0; s < 30; ++s) {
    DesignSpec spec;
    spec.k = 4;
    spec.rho = 0.8;
    spec.strength = strengths[s % 5];
    spec.errors = oracle::error_kind(s);
    const Dataset d = simulate_dataset(spec, 4300 + static_cast<std::uint64_t>(s));
    const StatProfile p = build_profile(compute_sufficient_stats(d));
    const auto ex = invert_ar(p, 0.05);
    const TslsFit f = tsls(d);
    const GridEvaluator ev = exact_grid_evaluator(p, Method::AR, 0.05);
    auto dist = [&](const IntervalUnion& g) {
      return ex.set.empty() != g.empty() ? 1.0 : normalized_distance(hausdorff(ex.set, g));
    };
    de.push_back(dist(invert_grid(ev, GridKind::Even, f, 501, 0.05).set));
    dc.push_back(dist(invert_grid(ev, GridKind::Cheb, f, 501, 0.05).set));
  }
  INFO("cheb median " << median(dc) << ", even median " << median(de));
  CHECK(median(dc) <= median(de));
}
