#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "heis/fit.hpp"
#include "heis/john.hpp"
#include "heis/sampling.hpp"

using namespace heis;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

/// per-ball fitter used by the propagation tests
BallFitter make_fitter(const SampledMap& f, int n_samples = 400) {
  return [&f, n_samples](const Ball& b) { return fit_dh_on_ball(f, b, n_samples).iso; };
}

/// empirical per-ball deviation sigma over a probe collection of balls
double estimate_sigma(const SampledMap& f, const std::vector<Ball>& balls, int n_samples = 400) {
  double sigma = 0.0;
  for (const auto& b : balls) {
    const DHFitResult fit = fit_dh_on_ball(f, b, n_samples);
    sigma = std::max(sigma, fit.lambda_hat / b.radius);
  }
  return sigma;
}

std::vector<Ball> probe_balls(const JohnDomain& d, double kappa,
                              const std::vector<Point>& queries) {
  std::vector<Ball> balls;
  balls.push_back({d.x_star, dist_to_boundary(d, d.x_star) / kappa, Metric::CC});
  for (const auto& x : queries) {
    const BallChain chain = build_chain(d, x, kappa);
    for (const auto& b : chain.balls) balls.push_back({b.center, b.radius, Metric::CC});
  }
  return balls;
}

}  // namespace

TEST_CASE("john parameters", "[john]") {
  SECTION("cc ball of radius 2") {
    const JohnDomain d = make_cc_ball_domain({0.3, -0.2, 0.5}, 2.0);
    CHECK(d.alpha == 2.0);
    CHECK(d.beta == 2.0);
    const auto [a, b] = john_params(d);
    CHECK(a == 2.0);
    CHECK(b == 2.0);
  }
  SECTION("degenerate box is rejected") {
    Box bad;
    bad.lo = {0, 0, 0};
    bad.hi = {1e-12, 1, 1};
    CHECK_THROWS_AS(make_box_domain(bad), std::invalid_argument);
    CHECK_THROWS_AS(make_cc_ball_domain({0, 0, 0}, 0.0), std::invalid_argument);
  }
  SECTION("unit coordinate box radii, stable under sampling refinement") {
    Box box;
    box.lo = {-1, -1, -1};
    box.hi = {1, 1, 1};
    const JohnDomain coarse = make_box_domain(box, 9, 40);
    const JohnDomain fine = make_box_domain(box, 17, 60);
    CHECK(coarse.alpha <= coarse.beta);
    CHECK(near(fine.alpha, coarse.alpha, 0.01 * fine.alpha));
    CHECK(near(fine.beta, coarse.beta, 0.01 * fine.beta));
    // the t-face centre realizes the circumradius sqrt(pi) for this box;
    // the inner radius is the witness-realizable cone slope, below the
    // inradius because of the corner curves
    CHECK(near(fine.beta, std::sqrt(std::numbers::pi), 5e-3));
    CHECK(fine.alpha > 0.4);
    CHECK(fine.alpha < 1.0);
  }
}

TEST_CASE("boundary distance", "[john]") {
  const JohnDomain ball = make_cc_ball_domain({0, 0, 0}, 1.5);
  CHECK(near(dist_to_boundary(ball, {0, 0, 0}), 1.5, 1e-12));
  CHECK_THROWS_AS(dist_to_boundary(ball, {5, 0, 0}), std::domain_error);

  Box box;
  box.lo = {-1, -1, -1};
  box.hi = {1, 1, 1};
  const JohnDomain bd = make_box_domain(box);
  CHECK(near(dist_to_boundary(bd, {0, 0, 0}), 1.0, 1e-3));
  // near the x = 1 face the Euclidean gap dominates
  CHECK(near(dist_to_boundary(bd, {0.9, 0, 0}), 0.1, 1e-3));
  CHECK_THROWS_AS(dist_to_boundary(bd, {2, 0, 0}), std::domain_error);
}

TEST_CASE("twisted cone condition along the John curves", "[john]") {
  auto check_curve = [](const JohnDomain& d, const Point& x) {
    const double l = cc_dist(x, d.x_star);
    for (int i = 1; i <= 24; ++i) {
      const double s = l * i / 24.0;
      const Point g = detail::geodesic_point(x, d.x_star, s / l);
      CHECK(dist_to_boundary(d, g) >= (d.alpha / l) * s * (1.0 - 1e-6));
    }
  };
  SECTION("ball domain, boundary-approaching points") {
    const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
    check_curve(d, dilate(0.99, Point{1.0, 0.0, 0.0}));
    check_curve(d, {0.0, 0.0, 0.99 * 0.99 / std::numbers::pi});
    check_curve(d, dilate(0.95, Point{-0.5, 0.5, 0.15}));
  }
  SECTION("box domain, corner-adjacent points") {
    Box box;
    box.lo = {-1, -1, -1};
    box.hi = {1, 1, 1};
    const JohnDomain d = make_box_domain(box);
    check_curve(d, {0.85, 0.85, -0.85});
    check_curve(d, {-0.9, 0.2, 0.9});
    check_curve(d, {0.0, -0.92, 0.0});
  }
}

TEST_CASE("chain construction on balls", "[john]") {
  const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
  SECTION("query at the distinguished point gives one ball") {
    const BallChain chain = build_chain(d, d.x_star, 2.0);
    CHECK(chain.balls.size() == 1);
    CHECK(near(chain.balls[0].radius, 0.5, 1e-12));
    CHECK(chain.links.empty());
  }
  SECTION("boundary-approaching query passes every clause for kappa 1, 2, 4") {
    const Point x = dilate(0.99, Point{std::sqrt(0.5), -std::sqrt(0.5), 0.0});
    for (double kappa : {1.0, 2.0, 4.0}) {
      const BallChain chain = build_chain(d, x, kappa);  // verify_chain runs inside
      CHECK(chain.balls.size() >= 3);
      CHECK(near(chain.balls.front().radius, d.ball_radius / kappa, 1e-9));
    }
  }
  SECTION("chain length grows like log of the boundary gap") {
    std::vector<std::size_t> ks;
    for (double gap : {1e-1, 1e-2, 1e-3}) {
      const Point x = dilate(1.0 - gap, Point{1.0, 0.0, 0.0});
      ks.push_back(build_chain(d, x, 2.0).balls.size());
    }
    CHECK(ks[1] > ks[0]);
    CHECK(ks[2] > ks[1]);
    // geometric radius growth means roughly constant increments per decade
    const auto d1 = static_cast<double>(ks[1] - ks[0]);
    const auto d2 = static_cast<double>(ks[2] - ks[1]);
    CHECK(std::fabs(d2 - d1) <= 3.0);
  }
  SECTION("kappa below one is rejected, outside points are rejected") {
    CHECK_THROWS_AS(build_chain(d, {0.1, 0, 0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(build_chain(d, {5, 0, 0}, 2.0), std::invalid_argument);
  }
}

TEST_CASE("chain construction on boxes", "[john]") {
  Box box;
  box.lo = {-1, -1, -1};
  box.hi = {1, 1, 1};
  const JohnDomain d = make_box_domain(box);
  for (double kappa : {1.0, 2.0, 4.0}) {
    const BallChain chain = build_chain(d, {0.85, 0.85, -0.85}, kappa);
    CHECK(chain.balls.size() >= 2);
  }
}

TEST_CASE("clause verification flags corrupted chains", "[john]") {
  const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
  const Point x = dilate(0.9, Point{1.0, 0.0, 0.0});
  BallChain chain = build_chain(d, x, 2.0);
  SECTION("oversized radius breaks clause 1") {
    BallChain bad = chain;
    bad.balls[0].radius *= 4.0;
    try {
      verify_chain(d, bad, x);
      FAIL("expected a clause failure");
    } catch (const ChainClauseError& e) {
      CHECK(e.clause() == 1);
    }
  }
  SECTION("radius jump breaks clause 2") {
    BallChain bad = chain;
    REQUIRE(bad.balls.size() >= 2);
    bad.balls[1].radius *= 1e-3;
    try {
      verify_chain(d, bad, x);
      FAIL("expected a clause failure");
    } catch (const ChainClauseError& e) {
      CHECK(e.clause() >= 1);  // shrunken ball violates placement or ratio
    }
  }
  SECTION("displaced link breaks clause 3") {
    BallChain bad = chain;
    REQUIRE(!bad.links.empty());
    bad.links[0].center = mul(bad.links[0].center, {0.5, 0.5, 0.0});
    try {
      verify_chain(d, bad, x);
      FAIL("expected a clause failure");
    } catch (const ChainClauseError& e) {
      CHECK(e.clause() == 3);
    }
  }
}

TEST_CASE("propagation with exact isometries", "[john]") {
  const Grid g = Grid::cube({0, 0, 0}, 1.5, 9);
  const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
  const Isometry iso{false, 0.9, {0.2, -0.1, 0.4}};
  const SampledMap f = map_from_isometry(iso, g);
  const auto r = propagate_global(d, f, make_fitter(f), 2.0, 0.0, 1.0, 1024);
  CHECK(r.sup_dh <= 1e-8);
  CHECK(r.sup_rho <= 1e-4);  // sqrt of the vertical residual floor
  // phi_star inverts the isometry up to a vertical translation
  const Isometry gap = compose(r.phi_star, iso);
  CHECK(std::abs(gap.trans.z()) <= 1e-7);
}

TEST_CASE("propagation bound for dilations on the ball", "[john]") {
  const Grid g = Grid::cube({0, 0, 0}, 1.5, 9);
  const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
  const double eps = 0.05;
  const SampledMap f = map_dilation(1.0 + eps, g);
  const double l_est = qi_report(f).l_est;
  const double kappa = 2.0;
  const auto queries =
      std::vector<Point>{dilate(0.9, Point{1, 0, 0}), dilate(0.8, Point{0, -1, 0.1})};
  const double sigma = estimate_sigma(f, probe_balls(d, kappa, queries));
  CHECK(sigma > 0.0);
  const auto r = propagate_global(d, f, make_fitter(f), kappa, sigma, l_est, 2048);
  CHECK(near(r.c1, propagation_constant(kappa, l_est, 1.0), 1e-12));
  CHECK(r.c1 <= 56.0 * l_est * kappa * d.beta / d.alpha);
  CHECK(r.sup_dh <= r.dh_bound);
  CHECK(r.sup_rho <= r.rho_bound);
}

TEST_CASE("propagation bound for a contact flow on the box", "[john]") {
  Box box;
  box.lo = {-1, -1, -1};
  box.hi = {1, 1, 1};
  const JohnDomain d = make_box_domain(box);
  const Grid g(box.scaled(1.2), {9, 9, 9});
  Potential pot;
  pot.value = [](const Point& p) { return p.x * p.y; };
  const SampledMap f = contact_flow_map(pot, 0.2, 32, g, 4.0);
  const double l_est = qi_report(f).l_est;
  const double kappa = 2.0;
  const double sigma = estimate_sigma(f, probe_balls(d, kappa, {{0.7, -0.6, 0.5}}));
  const auto r = propagate_global(d, f, make_fitter(f), kappa, sigma, l_est, 2048);
  CHECK(r.sup_dh <= r.dh_bound);
  CHECK(r.sup_rho <= r.rho_bound);
  CHECK(r.c1 <= 56.0 * l_est * kappa * d.beta / d.alpha);
}
