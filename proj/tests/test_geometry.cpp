#include <doctest.h>

#include "rasid/geometry.hpp"

using namespace rasid;

TEST_CASE("point to segment distance") {
  const Segment s{{0, 0}, {10, 0}};
  CHECK(point_segment_distance({5, 3}, s) == doctest::Approx(3.0));
  CHECK(point_segment_distance({-3, 4}, s) == doctest::Approx(5.0));  // past the a end
  CHECK(point_segment_distance({13, -4}, s) == doctest::Approx(5.0));
  CHECK(point_segment_distance({2, 0}, s) == 0.0);
  // degenerate segment is a point
  CHECK(point_segment_distance({3, 4}, Segment{{0, 0}, {0, 0}}) == doctest::Approx(5.0));
}

TEST_CASE("segment distance") {
  SUBCASE("parallel 6 m apart") {
    CHECK(segment_distance({{0, 0}, {10, 0}}, {{0, 6}, {10, 6}}) == doctest::Approx(6.0));
  }
  SUBCASE("crossing") { CHECK(segment_distance({{0, 0}, {10, 10}}, {{0, 10}, {10, 0}}) == 0.0); }
  SUBCASE("touching at an endpoint") { CHECK(segment_distance({{0, 0}, {5, 0}}, {{5, 0}, {5, 5}}) == 0.0); }
  SUBCASE("collinear overlap and gap") {
    CHECK(segment_distance({{0, 0}, {5, 0}}, {{3, 0}, {8, 0}}) == 0.0);
    CHECK(segment_distance({{0, 0}, {5, 0}}, {{7, 0}, {8, 0}}) == doctest::Approx(2.0));
  }
  SUBCASE("T shape, endpoint to interior") {
    CHECK(segment_distance({{0, 0}, {10, 0}}, {{4, 2}, {4, 9}}) == doctest::Approx(2.0));
  }
  SUBCASE("symmetric") {
    const Segment a{{1, 2}, {7, -3}}, b{{4, 5}, {9, 8}};
    CHECK(segment_distance(a, b) == segment_distance(b, a));
  }
}

TEST_CASE("rect contains is closed") {
  const Rect r{0, 0, 2, 1};
  CHECK(r.contains({0, 0}));
  CHECK(r.contains({2, 1}));
  CHECK_FALSE(r.contains({2.01, 0.5}));
}
