#ifndef SMONEY_SPACETIME_HPP
#define SMONEY_SPACETIME_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoney::spacetime {

// Event in 1+1-dimensional Minkowski spacetime, units with c = 1.
struct Point {
  double t = 0.0;
  double x = 0.0;
  std::string label;

  bool same_event(const Point& other) const {
    return t == other.t && x == other.x;
  }
};

// q is in the causal future of p. Lightlike separation counts as causal:
// signals at light speed are allowed.
inline bool causally_precedes(const Point& p, const Point& q) {
  return q.t - p.t >= std::abs(q.x - p.x);
}

inline bool spacelike(const Point& p, const Point& q) {
  return std::abs(p.t - q.t) < std::abs(p.x - q.x);
}

// Number of unordered spacelike pairs (the C of the multi-point bound).
// Duplicate events are rejected: presentation points must be distinct.
long long count_spacelike_pairs(std::span<const Point> points);

// True iff p causally precedes every point in the set.
bool intersection_past_contains(const Point& p, std::span<const Point> points);

// Labels of a maximal set of pairwise spacelike points are not needed by the
// bounds; C counts all spacelike pairs directly.

}  // namespace smoney::spacetime

#endif
