#include <doctest.h>

#include <limits>
#include <random>

#include "furnish/geometry.hpp"
#include "support.hpp"

using namespace furnish;
using furnish::testing::raster_iou;

TEST_CASE("boxes reject zero, negative and non-finite sizes") {
  CHECK_THROWS_AS(AxisBox(0, 0, 0, 1), GeometryError);
  CHECK_THROWS_AS(AxisBox(0, 0, 1, -2), GeometryError);
  CHECK_THROWS_AS(AxisBox(std::numeric_limits<double>::quiet_NaN(), 0, 1, 1), GeometryError);
  CHECK_THROWS_AS(AxisBox(0, 0, std::numeric_limits<double>::infinity(), 1), GeometryError);
  CHECK_NOTHROW(AxisBox(-3, 4, 0.01, 7));
}

TEST_CASE("intersection area") {
  const AxisBox a(0, 0, 2, 2);
  CHECK(intersection_area(a, a) == 4.0);
  CHECK(intersection_area(a, AxisBox(5, 5, 2, 2)) == 0.0);
  CHECK(intersection_area(a, AxisBox(1, 0, 2, 2)) == doctest::Approx(2.0).epsilon(1e-15));
  // Edge contact has no area.
  CHECK(intersection_area(a, AxisBox(2, 0, 2, 2)) == 0.0);

  SUBCASE("matches a cell-by-cell raster scan") {
    const AxisBox b(1, 0, 2, 2);
    const double cell = 0.01;  // coarse enough for an exhaustive scan
    const long long shared = furnish::testing::raster_shared_scan(a, b, cell);
    CHECK(shared * cell * cell == doctest::Approx(2.0).epsilon(0.02));
    CHECK(furnish::testing::raster_shared(a, b, cell) == shared);
  }
}

TEST_CASE("iou") {
  const AxisBox a(0, 0, 2, 2);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, AxisBox(5, 5, 2, 2)) == 0.0);
  CHECK(iou(a, AxisBox(1, 0, 2, 2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(iou(a, AxisBox(1, 0, 2, 2)) - raster_iou(a, AxisBox(1, 0, 2, 2))) <= 1e-3);
  // Nested box.
  CHECK(iou(AxisBox(0, 0, 4, 4), AxisBox(0, 0, 2, 2)) == doctest::Approx(0.25));
}

TEST_CASE("contains is closed") {
  const AxisBox outer(0, 0, 10, 10);
  CHECK(contains(outer, AxisBox(0, 0, 2, 2)));
  CHECK(contains(outer, outer));
  CHECK_FALSE(contains(outer, AxisBox(4.5, 0, 2, 2)));
  CHECK(contains(outer, AxisBox(4, 0, 2, 2)));  // flush with the right edge
  CHECK_FALSE(contains(AxisBox(0, 0, 2, 2), outer));

  SUBCASE("agrees with the raster oracle on random pairs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-3, 3), size(0.5, 4);
    for (int k = 0; k < 500; ++k) {
      const AxisBox o(pos(rng), pos(rng), size(rng) + 2, size(rng) + 2);
      const AxisBox in(pos(rng), pos(rng), size(rng), size(rng));
      const bool raster = furnish::testing::raster_shared(o, in) == furnish::testing::raster_cells(in);
      // Boxes within a raster cell of the edge are ambiguous at this resolution.
      const double gap = std::min({in.min_x() - o.min_x(), o.max_x() - in.max_x(), in.min_y() - o.min_y(),
                                   o.max_y() - in.max_y()});
      if (std::abs(gap) > 2 * furnish::testing::kRasterCell) CHECK(contains(o, in) == raster);
    }
  }
}

TEST_CASE("iou properties on random pairs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-5, 5), size(0.1, 5), shift(-20, 20);
  for (int k = 0; k < 2000; ++k) {
    const AxisBox a(pos(rng), pos(rng), size(rng), size(rng));
    const AxisBox b(pos(rng), pos(rng), size(rng), size(rng));
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == iou(b, a));
    CHECK(iou(a, a) == 1.0);
    const double tx = shift(rng), ty = shift(rng);
    CHECK(iou(a.translated(tx, ty), b.translated(tx, ty)) == doctest::Approx(v).epsilon(1e-9));
  }
}

TEST_CASE("iou matches the 0.001 raster on 1000 pairs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0, 4), size(1, 3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const AxisBox a(pos(rng), pos(rng), size(rng), size(rng));
    const AxisBox b(pos(rng), pos(rng), size(rng), size(rng));
    worst = std::max(worst, std::abs(iou(a, b) - raster_iou(a, b)));
  }
  CHECK(worst <= 1e-3);
}
