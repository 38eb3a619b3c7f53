#include "ivinv/invert_exact.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cctype>
#include <cmath>
#include <numbers>

#include "ivinv/errors.hpp"

namespace ivinv {

std::string method_name(Method m) {
  switch (m) {
    case Method::AR: return "AR";
    case Method::LM: return "LM";
    case Method::CQLR: return "CQLR";
    case Method::CLR: return "CLR";
    case Method::CIL: return "CIL";
    case Method::TRATIO: return "TRATIO";
    case Method::GRID_EVEN: return "GRID_EVEN";
    case Method::GRID_CHEB: return "GRID_CHEB";
    case Method::APPROX: return "APPROX";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string s;
  for (char c : name) s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Method m : {Method::AR, Method::LM, Method::CQLR, Method::CLR, Method::CIL, Method::TRATIO, Method::GRID_EVEN,
                   Method::GRID_CHEB, Method::APPROX})
    if (method_name(m) == s) return m;
  if (s == "T" || s == "T_RATIO") return Method::TRATIO;
  throw ConfigError("unknown method '" + name + "'");
}

namespace {

double theta_to_beta(double t) { return Compactification::inverse(t); }

// Refines a root bracket [a, b] with f(a), f(b) of opposite signs.
template <class F>
double bracket_root(F f, double a, double b, double fa, double fb, double rel = 1e-15) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  auto tol = [rel](double x, double y) { return std::abs(y - x) <= rel * (1.0 + std::abs(x)); };
  const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (br.first + br.second);
}

}  // namespace

IntervalUnion assemble_theta_set(std::vector<double> candidates, const std::function<bool(double)>& accept,
                                 const std::function<bool(double)>& touch) {
  std::vector<double> pts{-1.0, 1.0};
  for (double c : candidates)
    if (c > -1.0 && c < 1.0) pts.push_back(c);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Interval> th;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    if (!accept(mid)) continue;
    if (!th.empty() && th.back().hi == pts[i]) th.back().hi = pts[i + 1];
    else th.push_back({pts[i], pts[i + 1]});
  }
  std::vector<Interval> out;
  for (const auto& iv : th) out.push_back({theta_to_beta(iv.lo), theta_to_beta(iv.hi)});
  for (double c : candidates) {
    if (!(c > -1.0 && c < 1.0)) continue;
    const bool covered = std::any_of(th.begin(), th.end(), [c](const Interval& iv) { return c >= iv.lo && c <= iv.hi; });
    if (!covered && touch(c)) out.push_back({theta_to_beta(c), theta_to_beta(c)});
  }
  return IntervalUnion(std::move(out));
}

std::vector<double> level_crossings(const StatProfile& profile, const TrigRational& stat, double crit) {
  auto f = [&](double theta) {
    const double psi = profile.psi_of_theta(theta);
    return stat.num(psi) - crit * stat.den(psi);
  };
  return smooth_roots(f, -1.0, 1.0);
}

namespace {

void certify(InversionResult& res, const std::function<double(double)>& excess_at_beta) {
  double worst = 0.0;
  for (const auto& iv : res.set.intervals())
    for (double b : {iv.lo, iv.hi})
      if (std::isfinite(b)) worst = std::max(worst, std::abs(excess_at_beta(b)));
  res.diagnostics["boundary_residual"] = worst;
  res.diagnostics["components"] = static_cast<double>(res.set.size());
  res.diagnostics["empty"] = res.set.empty() ? 1.0 : 0.0;
  res.diagnostics["unbounded"] = res.set.bounded() ? 0.0 : 1.0;
  if (worst > 1e-6) res.notes.push_back("boundary certification exceeded 1e-6");
}

InversionResult invert_level(const StatProfile& profile, const TrigRational& stat, double crit, Method method,
                             double alpha, bool lm) {
  InversionResult res;
  res.method = method;
  res.alpha = alpha;
  res.diagnostics["critical_value"] = crit;
  if (profile.degenerate) {
    res.set = IntervalUnion::whole_line();
    res.notes.push_back("R = 0: statistic identically zero");
    certify(res, [](double) { return 0.0; });
    return res;
  }
  const std::vector<double> roots = level_crossings(profile, stat, crit);
  res.diagnostics["roots"] = static_cast<double>(roots.size());
  auto value = [&](double theta) { return stat(profile.psi_of_theta(theta)); };
  res.set = assemble_theta_set(
      roots, [&](double t) { return value(t) <= crit; },
      [&](double t) { return std::abs(value(t) - crit) <= 1e-9 * (1.0 + crit); });
  certify(res, [&](double b) {
    const DirectStats d = profile.direct_theta(Compactification::forward(b));
    const double s = lm ? d.lm : d.ar;
    return (s - crit) / (1.0 + crit);
  });
  return res;
}

}  // namespace

InversionResult invert_ar(const StatProfile& profile, double alpha) {
  return invert_level(profile, profile.ar, chi2_quantile(profile.k, alpha), Method::AR, alpha, false);
}

InversionResult invert_lm(const StatProfile& profile, double alpha) {
  InversionResult r = invert_level(profile, profile.lm, chi2_quantile(1, alpha), Method::LM, alpha, true);
  return r;
}

// ---------------------------------------------------------------------------
// CQLR

namespace {

struct QlrParts {
  double A, L, r, Delta;
  double rp, rpp;
  double U1, E1, S1;  // first-derivative condition: unsquared, squared difference, squared scale
  double U2, E2, S2;  // second-derivative condition
  double Qp;      // dQLR/dpsi
};

QlrParts qlr_parts(const StatProfile& p, double theta) {
  const double psi = p.psi_of_theta(theta);
  const auto a = p.ar.derivs(psi);
  const auto l = p.lm.derivs(psi);
  const auto r = p.rank.derivs(psi);
  QlrParts q{};
  q.A = a[0];
  q.L = l[0];
  q.r = r[0];
  q.rp = r[1];
  q.rpp = r[2];
  const double d = a[0] - r[0], dp = a[1] - r[1], dpp = a[2] - r[2];
  q.Delta = std::max(0.0, d * d + 4.0 * l[0] * r[0]);
  const double v = 2.0 * d * dp + 4.0 * (l[1] * r[0] + l[0] * r[1]);
  const double vp = 2.0 * dp * dp + 2.0 * d * dpp + 4.0 * (l[2] * r[0] + 2.0 * l[1] * r[1] + l[0] * r[2]);
  const double sd = std::sqrt(q.Delta);
  q.U1 = 2.0 * sd * dp + v;
  // Scales built from absolute terms, so cancellation to zero is measured against the
  // size of the ingredients rather than against the (possibly vanishing) result.
  const double v_abs = 2.0 * std::abs(d * dp) + 4.0 * (std::abs(l[1] * r[0]) + std::abs(l[0] * r[1]));
  q.E1 = 4.0 * q.Delta * dp * dp - v * v;
  q.S1 = 4.0 * q.Delta * dp * dp + v_abs * v_abs;
  const double X = dpp * r[1] - dp * r[2];
  const double Y = (2.0 * q.Delta * vp - v * v) * r[1] - 2.0 * q.Delta * v * r[2];
  const double vp_abs = 2.0 * dp * dp + 2.0 * std::abs(d * dpp) +
                        4.0 * (std::abs(l[2] * r[0]) + 2.0 * std::abs(l[1] * r[1]) + std::abs(l[0] * r[2]));
  const double X_abs = std::abs(dpp * r[1]) + std::abs(dp * r[2]);
  const double Y_abs = (2.0 * q.Delta * vp_abs + v_abs * v_abs) * std::abs(r[1]) + 2.0 * q.Delta * v_abs * std::abs(r[2]);
  q.U2 = 4.0 * q.Delta * sd * X + Y;
  const double d3 = q.Delta * q.Delta * q.Delta;
  q.E2 = 16.0 * d3 * X * X - Y * Y;
  q.S2 = 16.0 * d3 * X_abs * X_abs + Y_abs * Y_abs;
  q.Qp = sd > 0.0 ? q.U1 / (4.0 * sd) : 0.5 * (dp + std::copysign(std::abs(dp), dp));
  return q;
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Roots of a squared condition that are genuine sign changes of the unsquared one.
std::vector<double> filtered_roots(const std::function<double(double)>& squared,
                                   const std::function<double(double)>& unsquared, double lo, double hi,
                                   double noise, int* raw_count) {
  std::vector<double> c;
  SmoothRootOptions opt;
  opt.noise_floor = noise;
  // Piece ends are critical points of r where the squared conditions have double
  // roots located only to ~sqrt(eps); candidates that close to an end are that root.
  const double edge = 1e-7 * (hi - lo);
  for (double t : smooth_roots(squared, lo, hi, opt))
    if (t > lo + edge && t < hi - edge) c.push_back(t);
  if (raw_count) *raw_count += static_cast<int>(c.size());
  std::vector<double> kept;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double left = 0.5 * ((i == 0 ? lo : c[i - 1]) + c[i]);
    const double right = 0.5 * (c[i] + (i + 1 == c.size() ? hi : c[i + 1]));
    const int sl = sgn(unsquared(left)), sr = sgn(unsquared(right));
    if (sl != 0 && sr != 0 && sl != sr) kept.push_back(c[i]);
  }
  return kept;
}

// max |E| <= tol * max S over a probe grid, with (E, S) from the part accessor.
bool identically_small(const std::function<std::array<double, 2>(double)>& es, double lo, double hi, double tol,
                       double* scale = nullptr) {
  double emax = 0.0, smax = 0.0;
  for (int j = 0; j <= 64; ++j) {
    const auto v = es(lo + (hi - lo) * (j + 0.31) / 65.0);
    emax = std::max(emax, std::abs(v[0]));
    smax = std::max(smax, v[1]);
  }
  if (scale) *scale = smax;
  return emax <= tol * smax;
}

bool piece_linear(const StatProfile& profile, double lo, double hi, double* scale = nullptr) {
  return identically_small(
      [&](double t) {
        const QlrParts q = qlr_parts(profile, t);
        return std::array<double, 2>{q.E2, q.S2};
      },
      lo, hi, 1e-7, scale);
}

}  // namespace

std::vector<MonotonePiece> partition_injective(const StatProfile& profile) {
  std::vector<double> cuts{-1.0};
  for (double t : profile.rank_critical) cuts.push_back(t);
  cuts.push_back(1.0);
  std::vector<MonotonePiece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    MonotonePiece p;
    p.theta_lo = cuts[i];
    p.theta_hi = cuts[i + 1];
    p.beta_lo = theta_to_beta(p.theta_lo);
    p.beta_hi = theta_to_beta(p.theta_hi);
    p.r_lo = profile.rank_theta(p.theta_lo);
    p.r_hi = profile.rank_theta(p.theta_hi);
    p.increasing = p.r_hi >= p.r_lo;
    out.push_back(p);
  }
  return out;
}

std::vector<double> shape_breaks(const MonotonePiece& piece, const StatProfile& profile,
                                 std::map<std::string, double>* diag) {
  const double lo = piece.theta_lo, hi = piece.theta_hi;
  int raw = 0;
  auto E1 = [&](double t) { return qlr_parts(profile, t).E1; };
  auto U1 = [&](double t) { return qlr_parts(profile, t).U1; };
  auto E2 = [&](double t) { return qlr_parts(profile, t).E2; };
  auto U2 = [&](double t) { return qlr_parts(profile, t).U2; };
  std::vector<double> out;
  auto ES1 = [&](double t) {
    const QlrParts q = qlr_parts(profile, t);
    return std::array<double, 2>{q.E1, q.S1};
  };
  double s1 = 0.0, s2 = 0.0;
  if (!identically_small(ES1, lo, hi, 1e-7, &s1)) {
    auto k1 = filtered_roots(E1, U1, lo, hi, 1e-13 * s1, &raw);
    out.insert(out.end(), k1.begin(), k1.end());
  }
  const bool linear = piece_linear(profile, lo, hi, &s2);
  if (!linear) {
    auto k2 = filtered_roots(E2, U2, lo, hi, 1e-13 * s2, &raw);
    out.insert(out.end(), k2.begin(), k2.end());
  }
  std::sort(out.begin(), out.end());
  out = dedupe_sorted(out, 1e-13);
  if (diag) {
    (*diag)["shape_candidates"] += raw;
    (*diag)["shape_breaks"] += static_cast<double>(out.size());
    if (linear) (*diag)["linear_pieces"] += 1.0;
    if (raw > 10 * std::max(1, static_cast<int>(out.size()))) (*diag)["shape_inflation_warnings"] += 1.0;
  }
  return out;
}

namespace {

class StallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankSolver {
 public:
  RankSolver(const RankDomainFns& f, double tol) : f_(f), tol_(tol) {}

  double kap(double r) const { return f_.kappa(r)[0]; }
  double diff(double r) const { return f_.g(r) - kap(r); }
  int cmp(double r) const {
    const double k = kap(r), d = f_.g(r) - k;
    if (std::abs(d) <= 1e-11 * (1.0 + std::abs(k))) return 0;
    return d > 0 ? 1 : -1;
  }
  double root(double a, double b) const {
    auto h = [this](double r) { return diff(r); };
    return bracket_root(h, a, b, h(a), h(b), 1e-15);
  }

  void case_a(double r0, double r1, std::vector<double>& out) const {
    const int s0 = cmp(r0), s1 = cmp(r1);
    if (s0 == 0) out.push_back(r0);
    if (s1 == 0) out.push_back(r1);
    if (s0 < 0 && s1 > 0) out.push_back(root(r0, r1));
  }

  void case_b(double r0, double r1, std::vector<double>& out) const {
    const int s0 = cmp(r0), s1 = cmp(r1);
    if (s0 == 0) out.push_back(r0);
    if (s1 == 0) out.push_back(r1);
    if (s0 >= 0 && s1 >= 0) return;
    if ((s0 < 0) != (s1 < 0)) {
      if (s0 != 0 && s1 != 0) out.push_back(root(r0, r1));
      return;
    }
    // h = kappa - g is strictly convex; golden-section for its minimum.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = r0, b = r1, c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = -diff(c), fd = -diff(d);
    const double eps = tol_ * (1.0 + std::abs(r1));
    while (b - a > eps) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = -diff(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = -diff(d);
      }
    }
    const double rs = 0.5 * (a + b);
    const int ss = cmp(rs);
    if (ss < 0) return;
    if (ss == 0) {
      out.push_back(rs);
      return;
    }
    out.push_back(root(r0, rs));
    out.push_back(root(rs, r1));
  }

  // Tangent construction with generalized bisection, for g decreasing and convex.
  void case_c(double a, double b, std::vector<double>& out, int depth = 0) const {
    if (depth > 60) throw StallError("rank-domain solver: midpoint split depth exceeded");
    for (int iter = 0; iter < 400; ++iter) {
      const double eps = tol_ * (1.0 + std::abs(b));
      const int sa = cmp(a), sb = cmp(b);
      if (sa == 0) out.push_back(a);
      if (sb == 0) out.push_back(b);
      if (b - a <= eps) return;
      if (sa != 0) {
        // Cases 1 and 2: tangent from the lower function's value at a to the upper one.
        const bool swap = sa > 0;
        const double base = swap ? kap(a) : f_.g(a);
        auto H = [&](double r) {
          if (swap) return f_.g(r) - base - f_.dg(r) * (r - a);
          const auto kk = f_.kappa(r);
          return kk[0] - base - kk[1] * (r - a);
        };
        double rs = b;
        if (!(H(b) > 0.0)) {
          double x0 = a, x1 = b;
          while (x1 - x0 > eps) {
            const double m = 0.5 * (x0 + x1);
            (H(m) > 0.0 ? x0 : x1) = m;
          }
          rs = 0.5 * (x0 + x1);
        }
        const int ss = cmp(rs);
        if (ss == 0) {
          out.push_back(rs);
        } else if (ss != sa) {
          out.push_back(root(a, rs));
        } else if (rs >= b) {
          return;
        }
        if (rs - a <= 0.25 * eps && ss == sa) throw StallError("rank-domain solver stalled in the forward tangent step");
        a = rs;
        continue;
      }
      if (sb == 0) {
        const double m = 0.5 * (a + b);
        case_c(a, m, out, depth + 1);
        case_c(m, b, out, depth + 1);
        return;
      }
      // Cases 3 and 4: backward tangent from the lower function's value at b.
      const bool swap = sb > 0;
      const double base = swap ? kap(b) : f_.g(b);
      auto H = [&](double r) {
        if (swap) return f_.g(r) - base - f_.dg(r) * (r - b);
        const auto kk = f_.kappa(r);
        return kk[0] - base - kk[1] * (r - b);
      };
      double rs = a;
      if (!(H(a) > 0.0)) {
        double x0 = a, x1 = b;
        while (x1 - x0 > eps) {
          const double m = 0.5 * (x0 + x1);
          (H(m) > 0.0 ? x1 : x0) = m;
        }
        rs = 0.5 * (x0 + x1);
      }
      const int ss = cmp(rs);
      if (ss == 0) {
        out.push_back(rs);
      } else if (ss != sb) {
        out.push_back(root(rs, b));
      }
      if (b - rs <= 0.25 * eps && ss == sb) throw StallError("rank-domain solver stalled in the backward tangent step");
      b = rs;
    }
    throw StallError("rank-domain solver exceeded its iteration budget");
  }

 private:
  const RankDomainFns& f_;
  double tol_;
};

}  // namespace

std::vector<double> solve_rank_domain(double r0, double r1, GShape shape, const RankDomainFns& fns, double tol) {
  if (!(r1 >= r0)) throw ConfigError("solve_rank_domain: need r0 <= r1");
  RankSolver s(fns, tol);
  std::vector<double> out;
  switch (shape) {
    case GShape::Increasing: s.case_a(r0, r1, out); break;
    case GShape::DecreasingConcave: s.case_b(r0, r1, out); break;
    case GShape::DecreasingConvex: s.case_c(r0, r1, out); break;
  }
  std::sort(out.begin(), out.end());
  return dedupe_sorted(out, 1e-12);
}

InversionResult invert_cqlr(const StatProfile& profile, const CvfSpec& spec) {
  CqlrCvf kappa(spec);
  return invert_cqlr(profile, kappa);
}

InversionResult invert_cqlr(const StatProfile& profile, CqlrCvf& kappa) {
  const CvfSpec& spec = kappa.spec();
  if (spec.k != profile.k) throw ConfigError("invert_cqlr: CVF dimension does not match the profile");
  InversionResult res;
  res.method = Method::CQLR;
  res.alpha = spec.alpha;
  if (profile.degenerate) {
    res.set = IntervalUnion::whole_line();
    res.notes.push_back("R = 0: statistic identically zero");
    certify(res, [](double) { return 0.0; });
    return res;
  }
  if (profile.k == 1) {
    // QLR = AR and kappa = c_alpha(1).
    InversionResult r = invert_level(profile, profile.ar, kappa.c1(), Method::CQLR, spec.alpha, false);
    r.notes.push_back("k = 1: QLR equals AR and the critical value is constant");
    return r;
  }

  auto excess = [&](double theta) {
    const double q = profile.qlr_theta(theta);
    return q - kappa(profile.rank_theta(theta));
  };
  std::vector<double> roots;
  std::map<std::string, double>& diag = res.diagnostics;

  if (profile.rank_constant) {
    res.notes.push_back("rank statistic constant in beta: direct level-set search");
    roots = smooth_roots(excess, -1.0, 1.0);
  } else {
    auto pieces = partition_injective(profile);
    diag["pieces"] = static_cast<double>(pieces.size());
    for (auto& piece : pieces) {
      piece.shape_breaks = shape_breaks(piece, profile, &diag);
      std::vector<double> cuts{piece.theta_lo};
      for (double t : piece.shape_breaks) cuts.push_back(t);
      cuts.push_back(piece.theta_hi);
      const bool linear = piece_linear(profile, piece.theta_lo, piece.theta_hi);
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double sa = cuts[s], sb = cuts[s + 1];
        diag["segments"] += 1.0;
        const double ra = profile.rank_theta(sa), rb = profile.rank_theta(sb);
        const double r0 = std::min(ra, rb), r1 = std::max(ra, rb);
        const bool inc = rb >= ra;
        auto theta_of_r = [&](double r) {
          if (r <= r0) return inc ? sa : sb;
          if (r >= r1) return inc ? sb : sa;
          auto f = [&](double t) { return profile.rank_theta(t) - r; };
          return bracket_root(f, sa, sb, ra - r, rb - r, 1e-16);
        };
        auto segment_direct = [&]() {
          const double fa = excess(sa), fb = excess(sb);
          if (fa == 0.0) roots.push_back(sa);
          if (fb == 0.0) roots.push_back(sb);
          if (fa * fb < 0.0) roots.push_back(bracket_root(excess, sa, sb, fa, fb));
        };
        if (r1 - r0 <= 1e-12 * (1.0 + r1)) {
          diag["tiny_segments"] += 1.0;
          segment_direct();
          continue;
        }
        const double tm = 0.5 * (sa + sb);
        const QlrParts pm = qlr_parts(profile, tm);
        const int gp = sgn(pm.U1) * sgn(pm.rp), gpp = sgn(pm.U2) * sgn(pm.rp);
        GShape shape = GShape::Increasing;
        if (gp < 0) shape = (linear || gpp >= 0) ? GShape::DecreasingConvex : GShape::DecreasingConcave;
        diag[shape == GShape::Increasing ? "case_a" : shape == GShape::DecreasingConcave ? "case_b" : "case_c"] += 1.0;
        RankDomainFns fns;
        fns.g = [&](double r) { return profile.qlr_theta(theta_of_r(r)); };
        fns.dg = [&](double r) {
          double t = theta_of_r(r);
          QlrParts q = qlr_parts(profile, t);
          if (!(std::abs(q.rp) > 1e-12 * (1.0 + std::abs(q.r)))) {
            t += (t - tm > 0 ? -1.0 : 1.0) * 1e-9 * (sb - sa);
            q = qlr_parts(profile, t);
          }
          return q.Qp / q.rp;
        };
        fns.kappa = [&](double r) {
          const auto d = kappa.derivs(r);
          return std::array<double, 2>{d[0], d[1]};
        };
        try {
          for (double r : solve_rank_domain(r0, r1, shape, fns)) roots.push_back(theta_of_r(r));
        } catch (const StallError& e) {
          diag["stall_fallbacks"] += 1.0;
          res.notes.push_back(std::string(e.what()) + "; segment resolved by direct root search");
          for (double t : smooth_roots(excess, sa, sb)) roots.push_back(t);
        }
      }
    }
  }

  // Polish boundaries on the compact scale.
  for (double& t : roots) {
    const double h = 1e-8;
    const double a = std::max(-1.0, t - h), b = std::min(1.0, t + h);
    const double fa = excess(a), fb = excess(b);
    if (fa * fb < 0.0) t = bracket_root(excess, a, b, fa, fb);
  }
  std::sort(roots.begin(), roots.end());
  roots = dedupe_sorted(roots, 1e-13);
  diag["roots"] = static_cast<double>(roots.size());
  res.set = assemble_theta_set(
      roots, [&](double t) { return excess(t) <= 0.0; },
      [&](double t) {
        const double k = kappa(profile.rank_theta(t));
        return std::abs(profile.qlr_theta(t) - k) <= 1e-9 * (1.0 + k);
      });
  certify(res, [&](double b) {
    const DirectStats d = profile.direct_theta(Compactification::forward(b));
    const double k = kappa(d.rank);
    return (d.qlr - k) / (1.0 + k);
  });
  diag["cvf_evaluations"] = static_cast<double>(kappa.evaluations());
  return res;
}

}  // namespace ivinv
