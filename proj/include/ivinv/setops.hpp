#pragma once

#include <limits>
#include <string>
#include <vector>

namespace ivinv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval over the extended real line. Singletons [x, x] are allowed.
struct Interval {
  double lo;
  double hi;
};

/// Finite ordered union of disjoint closed intervals over the extended reals.
///
/// Construction normalizes: intervals are sorted, and overlapping or touching
/// pieces are merged, so interval i's hi is strictly below interval i+1's lo.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> parts);

  static IntervalUnion empty_set() { return {}; }
  static IntervalUnion whole_line() { return IntervalUnion({{-kInf, kInf}}); }
  static IntervalUnion single(double lo, double hi) { return IntervalUnion({{lo, hi}}); }

  const std::vector<Interval>& intervals() const { return parts_; }
  std::size_t size() const { return parts_.size(); }

  bool empty() const { return parts_.empty(); }
  bool is_whole_line() const;
  bool unbounded_left() const;
  bool unbounded_right() const;
  bool bounded() const { return !unbounded_left() && !unbounded_right(); }

  bool contains(double x) const;
  /// Distance from x to the set; +inf for the empty set.
  double distance(double x) const;
  /// Checks the disjoint/ascending invariant; used after deserialization.
  bool valid() const;

  std::string to_string() const;

  friend bool operator==(const IntervalUnion& a, const IntervalUnion& b);

 private:
  std::vector<Interval> parts_;
};

IntervalUnion set_union(const IntervalUnion& a, const IntervalUnion& b);

/// Smallest single interval containing u, or the empty set.
IntervalUnion hull(const IntervalUnion& u);

/// sup over points of a of the distance to b (0 when a is empty).
double directed_hausdorff(const IntervalUnion& a, const IntervalUnion& b);

/// Exact Hausdorff distance computed from the endpoint structure.
double hausdorff(const IntervalUnion& a, const IntervalUnion& b);

/// d / (1 + d), with infinity mapped to 1.
double normalized_distance(double d);

}  // namespace ivinv
