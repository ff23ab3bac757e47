#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "attract/geometry.hpp"

using namespace attract;

namespace {

constexpr double kTau = 6.283185307179586;

ManifoldGeometry unit_circle_parametric() {
  ParametricSpec spec{parse_expression("cos(t)", VarSet::only_t()),
                      parse_expression("sin(t)", VarSet::only_t()),
                      0.0, kTau, true};
  return ManifoldGeometry(ManifoldSpec{spec});
}

ManifoldGeometry unit_circle_implicit() {
  ImplicitSpec spec{parse_expression("x^2 + y^2 - 1", VarSet::xy()),
                    Rect{-2.0, 2.0, -2.0, 2.0}};
  return ManifoldGeometry(ManifoldSpec{spec});
}

void check_frame_invariants(const FrameSample& fs) {
  REQUIRE(!fs.frames.empty());
  for (const Frame& fr : fs.frames) {
    CHECK(fr.tangent.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fr.tangent.dot(fr.normal)) < 1e-12);
    Vec2 rotated = fr.tangent.perp();
    CHECK(attract::distance(rotated, fr.normal) < 1e-12);
  }
  for (std::size_t i = 1; i < fs.frames.size(); ++i)
    CHECK(fs.frames[i].arc_param > fs.frames[i - 1].arc_param);
}

}  // namespace

TEST_CASE("equilibrium frames cover the directions") {
  ManifoldGeometry geom{ManifoldSpec{EquilibriumSpec{{1.0, -2.0}}}};
  CHECK(geom.is_point());
  CHECK(!geom.is_closed_curve());
  FrameSample fs = geom.frames(4);
  REQUIRE(fs.frames.size() == 4);
  check_frame_invariants(fs);
  for (const Frame& fr : fs.frames)
    CHECK(attract::distance(fr.base, {1.0, -2.0}) < 1e-15);
  CHECK(attract::distance(fs.frames[0].normal, {1.0, 0.0}) < 1e-12);
  CHECK(attract::distance(fs.frames[1].normal, {0.0, 1.0}) < 1e-12);
  CHECK(attract::distance(fs.frames[2].normal, {-1.0, 0.0}) < 1e-12);
  CHECK(attract::distance(fs.frames[3].normal, {0.0, -1.0}) < 1e-12);
  CHECK(geom.distance({4.0, 2.0}) == doctest::Approx(5.0));
}

TEST_CASE("parametric circle frames") {
  ManifoldGeometry geom = unit_circle_parametric();
  CHECK(!geom.is_point());
  CHECK(geom.is_closed_curve());
  CHECK(geom.counterclockwise());

  FrameSample fs = geom.frames(8);
  REQUIRE(fs.frames.size() == 8);
  check_frame_invariants(fs);
  for (const Frame& fr : fs.frames) {
    CHECK(fr.base.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // tangent of a ccw circle runs counterclockwise
    CHECK(fr.tangent.dot(fr.base.perp()) == doctest::Approx(1.0));
  }
  CHECK(fs.frames.front().arc_param == doctest::Approx(0.0));
}

TEST_CASE("graph frames for both axes") {
  GraphSpec yx{GraphSpec::Axis::YofX,
               parse_expression("x^2", VarSet::only_x()), -1.0, 1.0};
  ManifoldGeometry gy{ManifoldSpec{yx}};
  FrameSample fy = gy.frames(11);
  REQUIRE(fy.frames.size() == 11);
  check_frame_invariants(fy);
  CHECK(fy.frames.front().base.x == doctest::Approx(-1.0));
  CHECK(fy.frames.back().base.x == doctest::Approx(1.0));
  // slope at x=0 is 0, so the frame there is axis-aligned
  const Frame& mid = fy.frames[5];
  CHECK(mid.base.x == doctest::Approx(0.0));
  CHECK(attract::distance(mid.tangent, {1.0, 0.0}) < 1e-12);
  CHECK(attract::distance(mid.normal, {0.0, 1.0}) < 1e-12);

  GraphSpec xy{GraphSpec::Axis::XofY, parse_expression("0", VarSet::only_y()),
               0.1, 3.0};
  ManifoldGeometry gx{ManifoldSpec{xy}};
  FrameSample fx = gx.frames(5);
  REQUIRE(fx.frames.size() == 5);
  check_frame_invariants(fx);
  for (const Frame& fr : fx.frames) {
    CHECK(fr.base.x == doctest::Approx(0.0));
    CHECK(attract::distance(fr.tangent, {0.0, 1.0}) < 1e-12);
    CHECK(attract::distance(fr.normal, {-1.0, 0.0}) < 1e-12);
  }
  CHECK(fx.frames.front().base.y == doctest::Approx(0.1));
  CHECK(fx.frames.back().base.y == doctest::Approx(3.0));
}

TEST_CASE("implicit extraction stays on the curve") {
  SUBCASE("line") {
    ImplicitSpec spec{parse_expression("x + y", VarSet::xy()),
                      Rect{-2.0, 2.0, -2.0, 2.0}};
    ManifoldGeometry geom{ManifoldSpec{spec}};
    REQUIRE(!geom.chains().empty());
    const Expr f = parse_expression("x + y", VarSet::xy());
    int checked = 0;
    for (const auto& chain : geom.chains())
      for (std::size_t i = 0; i < chain.points.size();
           i += std::max<std::size_t>(1, chain.points.size() / 5)) {
        CHECK(std::abs(f.eval(chain.points[i].x, chain.points[i].y)) <=
              1e-9);
        ++checked;
      }
    CHECK(checked >= 5);

    FrameSample fs = geom.frames(16);
    check_frame_invariants(fs);
    const Vec2 expected_normal = Vec2{1.0, 1.0}.normalized();
    for (const Frame& fr : fs.frames)
      CHECK(std::abs(std::abs(fr.normal.dot(expected_normal)) - 1.0) < 1e-9);
  }

  SUBCASE("circle") {
    ManifoldGeometry geom = unit_circle_implicit();
    REQUIRE(geom.chains().size() == 1);
    const ManifoldGeometry::Chain& chain = geom.chains().front();
    CHECK(chain.closed);
    CHECK(chain.points.size() >= 1024);
    for (std::size_t i = 0; i < chain.points.size(); i += 37)
      CHECK(chain.points[i].norm() == doctest::Approx(1.0).epsilon(1e-9));

    double len = 0.0;
    for (std::size_t i = 0; i + 1 < chain.points.size(); ++i)
      len += attract::distance(chain.points[i], chain.points[i + 1]);
    len += attract::distance(chain.points.back(), chain.points.front());
    CHECK(len == doctest::Approx(kTau).epsilon(1e-3));

    FrameSample fs = geom.frames(64);
    REQUIRE(static_cast<int>(fs.frames.size()) == 64);
    check_frame_invariants(fs);
    CHECK(fs.singular_skipped == 0);
    for (const Frame& fr : fs.frames) {
      CHECK(fr.base.norm() == doctest::Approx(1.0).epsilon(1e-9));
      // gradient normal points radially outward
      CHECK(fr.normal.dot(fr.base) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("empty zero set") {
    ImplicitSpec spec{parse_expression("x^2 + y^2 + 1", VarSet::xy()),
                      Rect{-2.0, 2.0, -2.0, 2.0}};
    CHECK_THROWS_AS(ManifoldGeometry{ManifoldSpec{spec}}, EmptyManifold);
  }

  SUBCASE("crossing lines") {
    ImplicitSpec spec{parse_expression("x^2 - y^2", VarSet::xy()),
                      Rect{-2.0, 2.0, -2.0, 2.0}};
    ManifoldGeometry geom{ManifoldSpec{spec}};
    REQUIRE(geom.chains().size() >= 2);
    const Expr f = parse_expression("x^2 - y^2", VarSet::xy());
    bool east = false, west = false;
    for (const auto& chain : geom.chains())
      for (const Vec2& p : chain.points) {
        CHECK(std::abs(f.eval(p.x, p.y)) <= 1e-8);
        if (p.x > 1.0) east = true;
        if (p.x < -1.0) west = true;
      }
    CHECK(east);
    CHECK(west);
  }
}

TEST_CASE("normals vary continuously along a closed curve") {
  ManifoldGeometry geom = unit_circle_implicit();
  FrameSample fs = geom.frames(64);
  for (std::size_t i = 0; i + 1 < fs.frames.size(); ++i) {
    double c = fs.frames[i].normal.dot(fs.frames[i + 1].normal);
    CHECK(c > 0.0);  // never flips by more than a quarter turn
  }
}

TEST_CASE("distance to curves") {
  SUBCASE("circle against closed forms") {
    for (ManifoldGeometry geom :
         {unit_circle_parametric(), unit_circle_implicit()}) {
      CHECK(geom.distance({2.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(geom.distance({0.3, 0.4}) == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(geom.distance({-3.0, 4.0}) ==
            doctest::Approx(4.0).epsilon(1e-9));
      CHECK(geom.distance({0.7071067811865476, 0.7071067811865476}) <
            1e-7);
    }
  }

  SUBCASE("matches a dense brute-force scan") {
    ManifoldGeometry geom = unit_circle_parametric();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coords(-1.8, 1.8);
    for (int trial = 0; trial < 25; ++trial) {
      Vec2 p{coords(rng), coords(rng)};
      double brute = std::abs(p.norm() - 1.0);  // exact for the circle
      CHECK(geom.distance(p) == doctest::Approx(brute).epsilon(1e-6));
    }
  }

  SUBCASE("open graph clamps to endpoints") {
    GraphSpec spec{GraphSpec::Axis::YofX,
                   parse_expression("x", VarSet::only_x()), 0.0, 1.0};
    ManifoldGeometry geom{ManifoldSpec{spec}};
    CHECK(geom.distance({0.5, 0.5}) < 1e-9);
    CHECK(geom.distance({1.0, 0.0}) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(geom.distance({2.0, 2.0}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(geom.distance({-1.0, -1.0}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  }

  SUBCASE("parabola off-curve point") {
    GraphSpec spec{GraphSpec::Axis::YofX,
                   parse_expression("x^2", VarSet::only_x()), -2.0, 2.0};
    ManifoldGeometry geom{ManifoldSpec{spec}};
    // nearest point to (0, 1) on y = x^2 is (±sqrt(1/2), 1/2)
    CHECK(geom.distance({0.0, 1.0}) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));
    CHECK(geom.distance({1.0, 1.0}) < 1e-7);
  }
}

TEST_CASE("distance is rotation invariant") {
  ImplicitSpec base{parse_expression("x^2/4 + y^2 - 1", VarSet::xy()),
                    Rect{-3.0, 3.0, -3.0, 3.0}};
  ManifoldGeometry geom{ManifoldSpec{base}};

  const double phi = 0.7;
  const double c = std::cos(phi), s = std::sin(phi);
  // F(R^T p) rotates the zero set by phi
  Expr xr = added(scaled(c, Expr::variable('x')),
                  scaled(s, Expr::variable('y')));
  Expr yr = added(scaled(-s, Expr::variable('x')),
                  scaled(c, Expr::variable('y')));
  Expr rotated_f =
      parse_expression("x^2/4 + y^2 - 1", VarSet::xy()).substituted(xr, yr);
  ManifoldGeometry rotated{
      ManifoldSpec{ImplicitSpec{rotated_f, Rect{-3.0, 3.0, -3.0, 3.0}}}};

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> coords(-2.5, 2.5);
  for (int trial = 0; trial < 20; ++trial) {
    Vec2 p{coords(rng), coords(rng)};
    Vec2 pr{c * p.x - s * p.y, s * p.x + c * p.y};
    CHECK(std::abs(geom.distance(p) - rotated.distance(pr)) < 1e-6);
  }
}

TEST_CASE("bounding boxes and default windows") {
  ManifoldGeometry point{ManifoldSpec{EquilibriumSpec{{1.0, 2.0}}}};
  Rect pw = point.default_window();
  CHECK(pw.xlo == doctest::Approx(-3.0));
  CHECK(pw.xhi == doctest::Approx(5.0));
  CHECK(pw.ylo == doctest::Approx(-2.0));
  CHECK(pw.yhi == doctest::Approx(6.0));

  ManifoldGeometry circle = unit_circle_parametric();
  Rect bb = circle.bounding_box();
  CHECK(bb.xlo == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(bb.xhi == doctest::Approx(1.0).epsilon(1e-4));
  Rect cw = circle.default_window();
  CHECK(cw.xlo == doctest::Approx(-4.0).epsilon(1e-3));
  CHECK(cw.xhi == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("invalid specs are rejected") {
  GraphSpec bad{GraphSpec::Axis::YofX,
                parse_expression("x", VarSet::only_x()), 2.0, -2.0};
  CHECK_THROWS_AS(ManifoldGeometry{ManifoldSpec{bad}}, InvalidManifold);

  // closed parametric curve whose endpoints do not meet
  ParametricSpec gap{parse_expression("cos(t)", VarSet::only_t()),
                     parse_expression("sin(t)", VarSet::only_t()),
                     0.0, 3.0, true};
  CHECK_THROWS_AS(ManifoldGeometry{ManifoldSpec{gap}}, InvalidManifold);
}

TEST_CASE("spec-level helpers") {
  ManifoldSpec spec{EquilibriumSpec{{0.0, 0.0}}};
  CHECK(distance_to_manifold(spec, {3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(sample_frames(spec, 8).frames.size() == 8);
}
