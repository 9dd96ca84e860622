#include "doctest.h"

#include "smoney/rng.hpp"
#include "smoney/spacetime.hpp"

using namespace smoney::spacetime;

TEST_CASE("causal order basics") {
  const Point origin{0.0, 0.0, "o"};
  CHECK(causally_precedes(origin, Point{5.0, 3.0, ""}));
  CHECK_FALSE(causally_precedes(origin, Point{2.0, 3.0, ""}));
  // lightlike boundary counts as causal
  CHECK(causally_precedes(origin, Point{3.0, 3.0, ""}));
  CHECK(causally_precedes(origin, origin));
}

TEST_CASE("spacelike pairs") {
  const Point a{1.0, -1.0, "a"}, b{1.0, 1.0, "b"};
  CHECK(spacelike(a, b));
  const std::vector<Point> two{a, b};
  CHECK(count_spacelike_pairs(two) == 1);

  const std::vector<Point> chain{
      Point{0.0, 0.0, "p"}, Point{2.0, 1.0, "q"}, Point{5.0, 2.0, "r"}};
  CHECK(count_spacelike_pairs(chain) == 0);

  std::vector<Point> four;
  for (int i = 0; i < 4; ++i)
    four.push_back(Point{0.0, static_cast<double>(i), std::to_string(i)});
  CHECK(count_spacelike_pairs(four) == 6);

  const std::vector<Point> dup{a, a};
  CHECK_THROWS_AS(count_spacelike_pairs(dup), std::invalid_argument);
}

TEST_CASE("intersection of causal pasts") {
  const std::vector<Point> points{Point{4.0, -2.0, "0"}, Point{4.0, 2.0, "1"}};
  CHECK(intersection_past_contains(Point{0.0, 0.0, ""}, points));
  CHECK_FALSE(intersection_past_contains(Point{4.0, -2.0, ""}, points));
  // on the past light cone boundary of both
  CHECK(intersection_past_contains(Point{2.0, 0.0, ""}, points));
  CHECK_THROWS_AS(intersection_past_contains(Point{0, 0, ""}, std::vector<Point>{}),
                  std::invalid_argument);
}

TEST_CASE("trichotomy for distinct points") {
  smoney::Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const Point p{rng.uniform() * 10 - 5, rng.uniform() * 10 - 5, "p"};
    const Point q{rng.uniform() * 10 - 5, rng.uniform() * 10 - 5, "q"};
    if (p.same_event(q)) continue;
    const bool pq = causally_precedes(p, q);
    const bool qp = causally_precedes(q, p);
    const bool sl = spacelike(p, q);
    CHECK(sl == spacelike(q, p));
    // exactly one of p<q, q<p, spacelike (lightlike folded into causal)
    int count = (pq ? 1 : 0) + (qp ? 1 : 0) + (sl ? 1 : 0);
    CHECK(count == 1);
  }
}

TEST_CASE("pair counting is permutation invariant") {
  smoney::Rng rng(7);
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back(Point{rng.uniform() * 4, rng.uniform() * 8 - 4,
                        std::to_string(i)});
  const long long base = count_spacelike_pairs(pts);
  for (int shuffle = 0; shuffle < 10; ++shuffle) {
    for (std::size_t i = pts.size(); i > 1; --i)
      std::swap(pts[i - 1], pts[rng.next_u64() % i]);
    CHECK(count_spacelike_pairs(pts) == base);
  }
}
