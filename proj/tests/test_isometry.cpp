#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "heis/isometry.hpp"
#include "heis/sampling.hpp"

using namespace heis;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

bool point_near(const Point& a, const Point& b, double tol) {
  return near(a.x, b.x, tol) && near(a.y, b.y, tol) && near(a.t, b.t, tol);
}

Isometry random_isometry(Rng& rng, double trans_scale, double angle_scale, bool allow_reflect) {
  Isometry f;
  f.reflect = allow_reflect && rng.coin();
  f.angle = normalize_angle(angle_scale * rng.uniform(-1.0, 1.0));
  f.trans = {trans_scale * rng.uniform(-1.0, 1.0), trans_scale * rng.uniform(-1.0, 1.0),
             trans_scale * rng.uniform(-1.0, 1.0)};
  return f;
}

}  // namespace

TEST_CASE("isometry application basics", "[isometry]") {
  CHECK(point_near(apply(iso_identity(), {1, 2, 3}), {1, 2, 3}, 0.0));
  CHECK(point_near(apply(iso_rotation(std::numbers::pi / 2), {1, 0, 0}), {0, 1, 0}, 1e-15));
  CHECK(point_near(apply(iso_reflection(), {1, 2, 3}), {1, -2, -3}, 0.0));
}

TEST_CASE("isometries preserve the three distances", "[isometry]") {
  Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    const Isometry f = random_isometry(rng, 2.0, 6.0, true);
    const Point p = rng.point_in_box(2.0, 2.0);
    const Point q = rng.point_in_box(2.0, 2.0);
    const Point fp = apply(f, p), fq = apply(f, q);
    CHECK(near(koranyi_dist(fp, fq), koranyi_dist(p, q), 1e-11 * (1.0 + koranyi_dist(p, q))));
    CHECK(near(dh_dist(fp, fq), dh_dist(p, q), 1e-11 * (1.0 + dh_dist(p, q))));
    CHECK(near(cc_dist(fp, fq), cc_dist(p, q), 1e-8 * (1.0 + cc_dist(p, q))));
  }
}

TEST_CASE("composition and inverse in canonical form", "[isometry]") {
  Rng rng(22);
  SECTION("compose with identity") {
    const Isometry f = random_isometry(rng, 1.0, 6.0, true);
    const Isometry c = compose(iso_identity(), f);
    CHECK(c.reflect == f.reflect);
    CHECK(near(c.angle, f.angle, 1e-15));
    CHECK(point_near(c.trans, f.trans, 1e-15));
  }
  SECTION("rotations add modulo 2pi") {
    const Isometry c = compose(iso_rotation(1.0), iso_rotation(5.9));
    CHECK_FALSE(c.reflect);
    CHECK(near(c.angle, normalize_angle(6.9), 1e-12));
    CHECK(point_near(c.trans, {0, 0, 0}, 0.0));
  }
  SECTION("compose agrees with pointwise application") {
    for (int i = 0; i < 80; ++i) {
      const Isometry f = random_isometry(rng, 2.0, 6.0, true);
      const Isometry g = random_isometry(rng, 2.0, 6.0, true);
      const Isometry fg = compose(f, g);
      CHECK(normalize_angle(fg.angle) == fg.angle);
      for (int j = 0; j < 5; ++j) {
        const Point p = rng.point_in_box(2.0, 2.0);
        CHECK(point_near(apply(fg, p), apply(f, apply(g, p)), 1e-11));
      }
    }
  }
  SECTION("inverse is a two-sided group inverse") {
    for (int i = 0; i < 80; ++i) {
      const Isometry f = random_isometry(rng, 2.0, 6.0, true);
      const Isometry fi = inverse(f);
      for (int j = 0; j < 5; ++j) {
        const Point p = rng.point_in_box(2.0, 2.0);
        CHECK(point_near(apply(compose(f, fi), p), p, 1e-12 * (1.0 + std::fabs(p.t))));
        CHECK(point_near(apply(compose(fi, f), p), p, 1e-12 * (1.0 + std::fabs(p.t))));
      }
    }
  }
}

TEST_CASE("horizontal matrix", "[isometry]") {
  SECTION("identity and plain rotation") {
    const Mat2 id = horizontal_matrix(iso_identity());
    CHECK(op_norm(id - Mat2::identity()) == 0.0);
    const Mat2 rot = horizontal_matrix(iso_rotation(0.7));
    CHECK(near(rot.a11, std::cos(0.7), 1e-15));
    CHECK(near(rot.a12, -std::sin(0.7), 1e-15));
  }
  SECTION("reflection composed with rotation B") {
    const double b = 0.9;
    const Mat2 m = horizontal_matrix(compose(iso_reflection(), iso_rotation(b)));
    CHECK(near(m.a11, std::cos(b), 1e-14));
    CHECK(near(m.a12, -std::sin(b), 1e-14));
    CHECK(near(m.a21, -std::sin(b), 1e-14));
    CHECK(near(m.a22, -std::cos(b), 1e-14));
  }
  SECTION("orthogonality, determinant sign, multiplicativity") {
    Rng rng(23);
    for (int i = 0; i < 60; ++i) {
      const Isometry f = random_isometry(rng, 2.0, 6.0, true);
      const Isometry g = random_isometry(rng, 2.0, 6.0, true);
      const Mat2 mf = horizontal_matrix(f);
      const Sv2 sv = singular_values(mf);
      CHECK(near(sv.max, 1.0, 1e-14));
      CHECK(near(sv.min, 1.0, 1e-14));
      CHECK(near(mf.det(), f.reflect ? -1.0 : 1.0, 1e-14));
      const Mat2 prod = horizontal_matrix(compose(f, g));
      CHECK(op_norm(prod - mf * horizontal_matrix(g)) < 1e-13);
    }
  }
}

TEST_CASE("deviation scaling basics", "[isometry]") {
  SECTION("identity and vertical translations are invisible") {
    const auto id = deviation_scaling_check(iso_identity(), {0.3, 0.1, -0.2}, 1.0, 3.0, 512);
    CHECK(id.sup_inner == 0.0);
    CHECK(id.sup_outer == 0.0);
    CHECK(id.dh_matrix_dev == 0.0);
    const auto vt = deviation_scaling_check(iso_translation({0, 0, 2.5}), {0, 0, 0}, 1.0, 2.0, 512);
    CHECK(vt.sup_inner == 0.0);
    CHECK(vt.sup_outer == 0.0);
    CHECK(vt.dh_matrix_dev == 0.0);
  }
  SECTION("small rotation about the origin, dense-sampling oracle") {
    const double a = 1e-3;
    const auto r = deviation_scaling_check(iso_rotation(a), {0, 0, 0}, 1.0, 3.0, 8192);
    const double eps = std::abs(std::polar(1.0, a) - Complex(1.0, 0.0));
    CHECK(near(r.sup_inner, eps, 1e-9));
    CHECK(r.sup_outer <= (2.0 * 3.0 + 1.0) * r.sup_inner * 1.0001);
    CHECK(near(r.dh_matrix_dev, eps, 1e-12));
  }
  CHECK_THROWS_AS(deviation_scaling_check(iso_identity(), {0, 0, 0}, -1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(deviation_scaling_check(iso_identity(), {0, 0, 0}, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("deviation scaling inequalities on random instances", "[isometry]") {
  Rng rng(24);
  const double slack = 1.05;
  for (int i = 0; i < 100; ++i) {
    const Isometry f = random_isometry(rng, 0.15, 0.15, true);
    const Point a = rng.point_in_box(2.0, 2.0);
    const double r = rng.uniform(0.3, 2.0);
    const double s = rng.uniform(1.0, 4.0);
    const auto dev = deviation_scaling_check(f, a, r, s, 2048);
    const double eps = dev.sup_inner / r;
    CHECK(dev.sup_outer <= (2.0 * s + 1.0) * r * eps * slack + 1e-12);
    CHECK(dev.dh_matrix_dev <= 2.0 * eps * slack + 1e-12);
  }
}
