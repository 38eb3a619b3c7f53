#include "ivinv/setops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ivinv {

IntervalUnion::IntervalUnion(std::vector<Interval> parts) {
  for (const auto& p : parts) {
    if (std::isnan(p.lo) || std::isnan(p.hi) || p.lo > p.hi)
      throw std::invalid_argument("IntervalUnion: malformed interval");
  }
  std::sort(parts.begin(), parts.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : parts) {
    if (!parts_.empty() && p.lo <= parts_.back().hi) {
      parts_.back().hi = std::max(parts_.back().hi, p.hi);
    } else {
      parts_.push_back(p);
    }
  }
}

bool IntervalUnion::is_whole_line() const {
  return parts_.size() == 1 && parts_[0].lo == -kInf && parts_[0].hi == kInf;
}

bool IntervalUnion::unbounded_left() const { return !parts_.empty() && parts_.front().lo == -kInf; }

bool IntervalUnion::unbounded_right() const { return !parts_.empty() && parts_.back().hi == kInf; }

bool IntervalUnion::contains(double x) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == parts_.begin()) return false;
  --it;
  return x <= it->hi;
}

double IntervalUnion::distance(double x) const {
  if (parts_.empty()) return kInf;
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  double best = kInf;
  if (it != parts_.end()) best = it->lo - x;
  if (it != parts_.begin()) {
    --it;
    best = std::min(best, x <= it->hi ? 0.0 : x - it->hi);
  }
  return best;
}

bool IntervalUnion::valid() const {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (!(parts_[i].lo <= parts_[i].hi)) return false;
    if (i > 0 && !(parts_[i - 1].hi < parts_[i].lo)) return false;
    if (i > 0 && parts_[i].lo == -kInf) return false;
    if (i + 1 < parts_.size() && parts_[i].hi == kInf) return false;
  }
  return true;
}

static std::string fmt_end(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string IntervalUnion::to_string() const {
  if (parts_.empty()) return "{}";
  std::string s;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += " U ";
    s += "[" + fmt_end(parts_[i].lo) + ", " + fmt_end(parts_[i].hi) + "]";
  }
  return s;
}

bool operator==(const IntervalUnion& a, const IntervalUnion& b) {
  if (a.parts_.size() != b.parts_.size()) return false;
  for (std::size_t i = 0; i < a.parts_.size(); ++i)
    if (a.parts_[i].lo != b.parts_[i].lo || a.parts_[i].hi != b.parts_[i].hi) return false;
  return true;
}

IntervalUnion set_union(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> parts = a.intervals();
  parts.insert(parts.end(), b.intervals().begin(), b.intervals().end());
  return IntervalUnion(std::move(parts));
}

IntervalUnion hull(const IntervalUnion& u) {
  if (u.empty()) return {};
  return IntervalUnion::single(u.intervals().front().lo, u.intervals().back().hi);
}

double directed_hausdorff(const IntervalUnion& a, const IntervalUnion& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return kInf;
  if (a.unbounded_left() && !b.unbounded_left()) return kInf;
  if (a.unbounded_right() && !b.unbounded_right()) return kInf;
  // dist(., b) is piecewise linear; on each interval of a its maximum sits at a
  // finite endpoint or at the midpoint of a gap of b lying inside a.
  double worst = 0.0;
  for (const auto& p : a.intervals()) {
    if (std::isfinite(p.lo)) worst = std::max(worst, b.distance(p.lo));
    if (std::isfinite(p.hi)) worst = std::max(worst, b.distance(p.hi));
  }
  const auto& bi = b.intervals();
  for (std::size_t i = 0; i + 1 < bi.size(); ++i) {
    const double mid = 0.5 * (bi[i].hi + bi[i + 1].lo);
    if (a.contains(mid)) worst = std::max(worst, b.distance(mid));
  }
  return worst;
}

double hausdorff(const IntervalUnion& a, const IntervalUnion& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return kInf;
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double normalized_distance(double d) {
  if (std::isinf(d)) return 1.0;
  if (d < 0 || std::isnan(d)) throw std::invalid_argument("normalized_distance: negative distance");
  return d / (1.0 + d);
}

}  // namespace ivinv
