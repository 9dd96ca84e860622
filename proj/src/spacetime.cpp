#include "smoney/spacetime.hpp"

namespace smoney::spacetime {

long long count_spacelike_pairs(std::span<const Point> points) {
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (points[i].same_event(points[j]))
        throw std::invalid_argument(
            "count_spacelike_pairs: duplicate presentation point '" +
            points[i].label + "'");
  long long c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (spacelike(points[i], points[j])) ++c;
  return c;
}

bool intersection_past_contains(const Point& p,
                                std::span<const Point> points) {
  if (points.empty())
    throw std::invalid_argument("intersection_past_contains: empty point set");
  for (const Point& q : points)
    if (!causally_precedes(p, q)) return false;
  return true;
}

}  // namespace smoney::spacetime
