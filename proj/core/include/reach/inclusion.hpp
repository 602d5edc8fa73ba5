#pragma once

// Right-hand-side model F(t,x) = f(t,x) + U for the differential inclusion
// x'(t) in F(t,x(t)): an expression-defined drift plus a convex compact
// disturbance body containing the origin. The one-step Euler map is
// Phi(t,x) = x + h f(t,x) + h U.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reach/expr.hpp"
#include "reach/geometry.hpp"
#include "reach/grid.hpp"
#include "reach/vec.hpp"

namespace reach {

class InclusionError : public std::runtime_error {
 public:
  explicit InclusionError(const std::string& what) : std::runtime_error(what) {}
};

struct InclusionRHS {
  int dim = 0;
  std::vector<Expr> drift;            // one expression per component
  ConvexBody disturbance;             // centered body containing 0
  double lipschitz = 0.0;             // L, a true bound for certified runs
  bool lipschitz_estimated = false;   // true when L came from the sampler

  InclusionRHS() : disturbance(ConvexBody::from_point(Vec{0.0})) {}
};

// Checks the structural invariants (drift arity, 0 in U, L > 0).
InclusionRHS make_rhs(int dim, std::vector<Expr> drift, ConvexBody disturbance,
                      double lipschitz, bool lipschitz_estimated = false);

// f(t,x); drift evaluation errors carry the (t, x) context.
Vec drift_at(const InclusionRHS& rhs, double t, const Vec& x);

// The Euler image x + h f(t,x) + h U as a convex body.
ConvexBody euler_image(const InclusionRHS& rhs, double t, const Vec& x, double h);

// Grid blowups of the Euler image of one source cell.
GridSet image_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                    double alpha, double rho);
GridSet boundary_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                       double alpha, double rho);
// B_kappa around the blown-up image boundary, i.e. boundary cells at radius
// alpha + kappa.
GridSet band_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                   double alpha, double kappa, double rho);

// Finite-difference sup of the drift Jacobian in the max-norm over a regular
// sample grid, times a 1.1 safety factor. Convenience only: the result is
// not a certified Lipschitz bound and callers must brand it as such.
double estimate_lipschitz(const InclusionRHS& rhs, const Box& domain, int samples_per_axis,
                          double t = 0.0);

struct InverseImageResult {
  Vec x_hat;
  std::vector<double> residuals;  // |r^k|_inf per iteration, including r^0
};

// Constructive inverse of the Euler map: finds x_hat with
// dist(y_hat, Phi(t, x_hat)) <= tol and
// |x_hat - x0| <= dist(y_hat, Phi(t, x0)) / (1 - Lh) + tol
// by the projection-residual iteration. Box disturbances only; requires
// Lh < 1. Non-convergence within the geometric-decay budget signals an
// underestimated Lipschitz constant and raises InclusionError.
InverseImageResult inverse_image_point(const InclusionRHS& rhs, double t, double h,
                                       const Vec& x0, const Vec& y_hat, double tol);

}  // namespace reach
