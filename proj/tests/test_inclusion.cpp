#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reach/inclusion.hpp"

using namespace reach;

namespace {

InclusionRHS linear_rhs() {
  return make_rhs(2, {parse_expr("x1", 2), parse_expr("x2", 2)},
                  ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 1.0)), 1.0);
}

InclusionRHS mustache_rhs(double lipschitz = 2.0) {
  return make_rhs(2,
                  {parse_expr("x1*(1 - abs(x1)) - x1*x2", 2), parse_expr("x1^4 - 1/2", 2)},
                  ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 0.2)), lipschitz);
}

InclusionRHS still_rhs(double radius, double lipschitz = 1e-6) {
  return make_rhs(2, {parse_expr("0", 2), parse_expr("0", 2)},
                  ConvexBody::from_box(box_at(Vec{0.0, 0.0}, radius)), lipschitz);
}

// box-box Hausdorff distance in the max-norm
double box_hausdorff(const Box& a, const Box& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    m = std::max({m, std::fabs(a.lo[i] - b.lo[i]), std::fabs(a.hi[i] - b.hi[i])});
  return m;
}

}  // namespace

TEST_CASE("rhs invariants") {
  CHECK_THROWS_AS(make_rhs(2, {parse_expr("x1", 2), parse_expr("x2", 2)},
                           ConvexBody::from_box(box_at(Vec{5.0, 5.0}, 1.0)), 1.0),
                  InclusionError);  // 0 not in U
  CHECK_THROWS_AS(make_rhs(2, {parse_expr("x1", 2)},
                           ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 1.0)), 1.0),
                  InclusionError);  // arity
  CHECK_THROWS_AS(make_rhs(2, {parse_expr("x1", 2), parse_expr("x2", 2)},
                           ConvexBody::from_box(box_at(Vec{0.0, 0.0}, 1.0)), 0.0),
                  InclusionError);  // L floor
}

TEST_CASE("euler images") {
  Box img = euler_image(linear_rhs(), 0.0, Vec{0.0, 0.0}, 0.1).baked_box();
  CHECK(img.lo[0] == doctest::Approx(-0.1));
  CHECK(img.hi[0] == doctest::Approx(0.1));

  // mustache drift at (1, 0): f = (0, 0.5)
  Box m = euler_image(mustache_rhs(), 0.0, Vec{1.0, 0.0}, 0.025).baked_box();
  CHECK(m.center()[0] == doctest::Approx(1.0));
  CHECK(m.center()[1] == doctest::Approx(0.0125));
  CHECK(m.half_width(0) == doctest::Approx(0.005));

  // zero-radius disturbance: a singleton at the explicit Euler point
  Box pt = euler_image(still_rhs(0.0), 0.0, Vec{0.3, -0.2}, 0.5).baked_box();
  CHECK(pt.lo[0] == doctest::Approx(0.3));
  CHECK(pt.hi[0] == doctest::Approx(0.3));
  CHECK(pt.lo[1] == doctest::Approx(-0.2));
}

TEST_CASE("image cell counts on the linear scenario") {
  InclusionRHS rhs = linear_rhs();
  // h=0.2, rho=0.04, alpha*=0.024: box radius 0.224 -> 11x11
  CHECK(image_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.04).size() == 121);
  // h=0.1, rho=0.01, alpha*=0.0055: radius 0.1055 -> 21x21
  CHECK(image_cells(rhs, 0.0, GridIndex{0, 0}, 0.1, 0.0055, 0.01).size() == 441);
  // zero disturbance with alpha = rho/2 still captures at least one cell
  InclusionRHS still = still_rhs(0.0);
  CHECK(image_cells(still, 0.0, GridIndex{3, -2}, 0.2, 0.02, 0.04).size() >= 1);
}

TEST_CASE("boundary cell counts") {
  InclusionRHS rhs = linear_rhs();
  GridSet band = boundary_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.04);
  CHECK(band.size() == 40);  // the max|i| = 5 shell
  for (const auto& g : band) CHECK(std::max(std::abs(g[0]), std::abs(g[1])) == 5);

  // zero-radius disturbance: boundary of a point is the point
  InclusionRHS still = still_rhs(0.0);
  CHECK(boundary_cells(still, 0.0, GridIndex{0, 0}, 0.25, 0.02, 0.04) ==
        image_cells(still, 0.0, GridIndex{0, 0}, 0.25, 0.02, 0.04));

  // random box bodies: band membership matches the dist_boundary oracle
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> hd(0.05, 0.24);
  for (int trial = 0; trial < 20; ++trial) {
    const double h = hd(rng);
    const double rho = 0.05;
    const double alpha = (1.0 + h) * rho / 2.0;
    GridIndex src{trial - 10, 5 - trial};
    ConvexBody img = euler_image(rhs, 0.0, world_point(src, 2, rho), h);
    GridSet b = boundary_cells(rhs, 0.0, src, h, alpha, rho);
    GridSet full = image_cells(rhs, 0.0, src, h, alpha, rho);
    for (const auto& g : full) {
      const double d = dist_boundary(img, world_point(g, 2, rho));
      if (std::fabs(d - alpha) > 1e-9) CHECK(b.contains(g) == (d < alpha));
    }
  }
}

TEST_CASE("band cell counts") {
  InclusionRHS rhs = linear_rhs();
  // kappa = 0 is exactly the boundary band
  CHECK(band_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.0, 0.04) ==
        boundary_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.04));

  // linear scenario at kappa_hat = 0.168: shells 1 <= max|i| <= 9
  GridSet band = band_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.168, 0.04);
  CHECK(band.size() == 19 * 19 - 1);

  // kappa big enough to swallow the erosion: the fully inflated image
  CHECK(band_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 10.0, 0.04) ==
        image_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024 + 10.0, 0.04));
  // infinite override behaves the same as "swallowed"
  CHECK(band_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024,
                   std::numeric_limits<double>::infinity(), 0.04) ==
        image_cells(rhs, 0.0, GridIndex{0, 0}, 0.2, 0.024, 0.04));
}

TEST_CASE("band is contained in the correspondingly inflated image") {
  InclusionRHS rhs = linear_rhs();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> kd(0.0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const double kappa = kd(rng);
    GridSet band = band_cells(rhs, 0.0, GridIndex{2, 1}, 0.2, 0.024, kappa, 0.04);
    GridSet big = image_cells(rhs, 0.0, GridIndex{2, 1}, 0.2, 0.024 + kappa, 0.04);
    for (const auto& g : band) CHECK(big.contains(g));
  }
}

TEST_CASE("images stay nonempty and chain-connected at alpha*") {
  InclusionRHS rhs = mustache_rhs();
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> coord(-30, 30);
  std::uniform_real_distribution<double> hd(0.01, 0.12);
  for (int trial = 0; trial < 30; ++trial) {
    const double h = hd(rng);
    const double rho = 0.01;
    const double alpha = (1.0 + rhs.lipschitz * h) * rho / 2.0;
    GridIndex src{coord(rng), coord(rng)};
    GridSet cells = image_cells(rhs, 0.0, src, h, alpha, rho);
    CHECK(!cells.empty());
    CHECK(is_chain_connected(cells));
    GridSet band = boundary_cells(rhs, 0.0, src, h, alpha, rho);
    for (const auto& g : band) CHECK(cells.contains(g));
  }
}

TEST_CASE("lipschitz estimation") {
  // exact Jacobian identity: 1.0, reported with the 1.1 safety factor
  CHECK(estimate_lipschitz(linear_rhs(), box_at(Vec{0.0, 0.0}, 2.0), 9) ==
        doctest::Approx(1.1));

  // constant drift: 0 (the caller must then reject L=0 and use a floor)
  CHECK(estimate_lipschitz(still_rhs(1.0), box_at(Vec{0.0, 0.0}, 2.0), 9) == 0.0);

  // mustache over [-1.5,1.5]^2 against the densely sampled analytic sup:
  // max row sum = max(|1-2|x1|-x2| + |x1|, 4|x1|^3) peaks at 13.5
  double analytic = 0.0;
  for (double x1 = -1.5; x1 <= 1.5; x1 += 0.01)
    for (double x2 = -1.5; x2 <= 1.5; x2 += 0.01) {
      const double row1 = std::fabs(1.0 - 2.0 * std::fabs(x1) - x2) + std::fabs(x1);
      const double row2 = std::fabs(4.0 * x1 * x1 * x1);
      analytic = std::max({analytic, row1, row2});
    }
  const double estimated = estimate_lipschitz(mustache_rhs(), box_at(Vec{0.0, 0.0}, 1.5), 21);
  CHECK(analytic == doctest::Approx(13.5).epsilon(1e-6));
  CHECK(estimated / 1.1 == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("lipschitz consistency of the disturbance-translated images") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> coord(-0.3, 0.3);
  InclusionRHS rhs = mustache_rhs();  // registry L = 2 covers this window
  const double h = 0.05;
  for (int trial = 0; trial < 50; ++trial) {
    Vec x{coord(rng), coord(rng)};
    Vec y{coord(rng), coord(rng)};
    const Box bx = euler_image(rhs, 0.0, x, h).baked_box();
    const Box by = euler_image(rhs, 0.0, y, h).baked_box();
    // the h f(.) part moves at most L h |x-y|; the identity carrier adds |x-y|
    CHECK(box_hausdorff(bx, by) <=
          (1.0 + rhs.lipschitz * h) * norm_inf(x - y) * 1.05 + 1e-12);
  }
}

TEST_CASE("inverse image point, hand iteration") {
  // d=1, F(x) = x + B_1, h = 0.1: y=0.2 pulls x to 0.1 in two iterations
  InclusionRHS rhs = make_rhs(1, {parse_expr("x1", 1)},
                              ConvexBody::from_box(box_at(Vec{0.0}, 1.0)), 1.0);
  auto res = inverse_image_point(rhs, 0.0, 0.1, Vec{0.0}, Vec{0.2}, 1e-12);
  CHECK(res.x_hat[0] == doctest::Approx(0.1));
  REQUIRE(res.residuals.size() == 2);
  CHECK(res.residuals[0] == doctest::Approx(0.1));
  CHECK(res.residuals[1] == doctest::Approx(0.0));
  // 0.2 lies in Phi(0.1) = [0.01, 0.21] and |x_hat| <= 0.1/0.9
  CHECK(std::fabs(res.x_hat[0] - 0.0) <= 0.1 / 0.9 + 1e-12);

  // y already in the image: returns x0 untouched
  auto zero = inverse_image_point(rhs, 0.0, 0.1, Vec{0.0}, Vec{0.05}, 1e-12);
  CHECK(zero.x_hat[0] == 0.0);
  CHECK(zero.residuals.size() == 1);
}

TEST_CASE("inverse image point, random contraction property") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> entry(-0.5, 0.5);
  std::uniform_real_distribution<double> target(-1.5, 1.5);
  std::uniform_real_distribution<double> radius(0.2, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    // affine drift with exact max-norm Lipschitz constant = max row sum
    const double a11 = entry(rng), a12 = entry(rng), a21 = entry(rng), a22 = entry(rng);
    const double L = std::max(std::fabs(a11) + std::fabs(a12),
                              std::fabs(a21) + std::fabs(a22)) + 1e-9;
    const double h = 0.25 / L;  // Lh = 0.25
    auto fmt = [](double v) {
      char buf[64];
      snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    InclusionRHS rhs = make_rhs(
        2,
        {parse_expr(fmt(a11) + "*x1 + " + fmt(a12) + "*x2", 2),
         parse_expr(fmt(a21) + "*x1 + " + fmt(a22) + "*x2", 2)},
        ConvexBody::from_box(box_at(Vec{0.0, 0.0}, radius(rng))), L);

    Vec x0{entry(rng), entry(rng)};
    Vec y{target(rng), target(rng)};
    const double tol = 1e-11;
    auto res = inverse_image_point(rhs, 0.0, h, x0, y, tol);

    // y within tol of Phi(x_hat)
    const Box img = euler_image(rhs, 0.0, res.x_hat, h).baked_box();
    double dist = 0.0;
    for (int i = 0; i < 2; ++i)
      dist = std::max({dist, img.lo[i] - y[i], y[i] - img.hi[i]});
    CHECK(dist <= tol);

    // contraction bound against the brute-force initial distance
    const Box img0 = euler_image(rhs, 0.0, x0, h).baked_box();
    double d0 = 0.0;
    for (int i = 0; i < 2; ++i)
      d0 = std::max({d0, img0.lo[i] - y[i], y[i] - img0.hi[i], 0.0});
    const double lh = rhs.lipschitz * h;
    CHECK(norm_inf(res.x_hat - x0) <= d0 / (1.0 - lh) + tol);

    // geometric residual decay
    for (std::size_t k = 0; k + 1 < res.residuals.size(); ++k) {
      if (res.residuals[k] > 1e-12)
        CHECK(res.residuals[k + 1] <= lh * res.residuals[k] + 1e-12);
    }
  }
}

TEST_CASE("inverse image rejects unsupported setups") {
  InclusionRHS rhs = linear_rhs();
  CHECK_THROWS_AS(inverse_image_point(rhs, 0.0, 2.0, Vec{0.0, 0.0}, Vec{1.0, 1.0}, 1e-9),
                  InclusionError);  // Lh >= 1

  HPolytope diamond;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) diamond.faces.push_back({Vec{sx, sy}, 1.0});
  diamond.bbox = make_box(Vec{-1.0, -1.0}, Vec{1.0, 1.0});
  InclusionRHS poly = make_rhs(2, {parse_expr("x1", 2), parse_expr("x2", 2)},
                               ConvexBody::from_polytope(std::move(diamond)), 1.0);
  CHECK_THROWS_AS(inverse_image_point(poly, 0.0, 0.1, Vec{0.0, 0.0}, Vec{1.0, 1.0}, 1e-9),
                  InclusionError);  // box disturbances only
}
