#include "reach/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace reach {

namespace {

std::string vec_to_string(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < v.dim; ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ')';
  return os.str();
}

}  // namespace

InclusionRHS make_rhs(int dim, std::vector<Expr> drift, ConvexBody disturbance,
                      double lipschitz, bool lipschitz_estimated) {
  if (dim < 1 || dim > kMaxDim) throw InclusionError("rhs: bad dimension");
  if (static_cast<int>(drift.size()) != dim)
    throw InclusionError("rhs: need exactly one drift expression per component");
  for (const auto& e : drift)
    if (!e.valid() || e.dim() != dim) throw InclusionError("rhs: drift dimension mismatch");
  if (disturbance.dim() != dim) throw InclusionError("rhs: disturbance dimension mismatch");
  if (!contains(disturbance, Vec(dim), 1e-12))
    throw InclusionError("rhs: disturbance body must contain the origin");
  if (!(lipschitz > 0.0))
    throw InclusionError(
        "rhs: Lipschitz constant must be positive (use a small floor such as 1e-6 "
        "for constant drifts)");
  InclusionRHS rhs;
  rhs.dim = dim;
  rhs.drift = std::move(drift);
  rhs.disturbance = std::move(disturbance);
  rhs.lipschitz = lipschitz;
  rhs.lipschitz_estimated = lipschitz_estimated;
  return rhs;
}

Vec drift_at(const InclusionRHS& rhs, double t, const Vec& x) {
  Vec f(rhs.dim);
  for (int i = 0; i < rhs.dim; ++i) {
    try {
      f[i] = rhs.drift[static_cast<size_t>(i)].eval(x, t);
    } catch (const EvalError& e) {
      throw EvalError("drift component " + std::to_string(i + 1) + " at t=" +
                      std::to_string(t) + ", x=" + vec_to_string(x) + ": " + e.what());
    }
  }
  return f;
}

ConvexBody euler_image(const InclusionRHS& rhs, double t, const Vec& x, double h) {
  if (!(h > 0.0)) throw InclusionError("euler_image: step size must be positive");
  const Vec center = x + h * drift_at(rhs, t, x);
  return rhs.disturbance.carried(center, h);
}

GridSet image_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                    double alpha, double rho) {
  return rasterize(euler_image(rhs, t, world_point(x, rhs.dim, rho), h), alpha, rho);
}

GridSet boundary_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                       double alpha, double rho) {
  return rasterize_boundary(euler_image(rhs, t, world_point(x, rhs.dim, rho), h), alpha, rho);
}

GridSet band_cells(const InclusionRHS& rhs, double t, const GridIndex& x, double h,
                   double alpha, double kappa, double rho) {
  if (kappa < 0.0) throw InclusionError("band_cells: negative band radius");
  const ConvexBody img = euler_image(rhs, t, world_point(x, rhs.dim, rho), h);
  if (!std::isfinite(kappa)) return rasterize(img, alpha, rho);
  // B_kappa(B_alpha(dPhi)) = B_{alpha+kappa}(dPhi)
  return rasterize_boundary(img, alpha + kappa, rho);
}

double estimate_lipschitz(const InclusionRHS& rhs, const Box& domain, int samples_per_axis,
                          double t) {
  if (samples_per_axis < 2) throw InclusionError("estimate_lipschitz: need >= 2 samples per axis");
  if (domain.dim() != rhs.dim) throw InclusionError("estimate_lipschitz: domain dimension mismatch");
  const int d = rhs.dim;
  const int n = samples_per_axis;

  std::array<double, kMaxDim> step{};
  for (int i = 0; i < d; ++i)
    step[static_cast<size_t>(i)] = (domain.hi[i] - domain.lo[i]) / (10.0 * n);

  std::array<int, kMaxDim> idx{};
  double worst = 0.0;
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      const double frac = static_cast<double>(idx[static_cast<size_t>(i)]) / (n - 1);
      x[i] = domain.lo[i] + frac * (domain.hi[i] - domain.lo[i]);
    }
    // max row sum of the central-difference Jacobian = operator norm
    // on (R^d, max-norm)
    for (int row = 0; row < d; ++row) {
      double row_sum = 0.0;
      for (int col = 0; col < d; ++col) {
        const double dx = step[static_cast<size_t>(col)];
        if (dx == 0.0) continue;
        Vec xp = x, xm = x;
        xp[col] += dx;
        xm[col] -= dx;
        const double fp = rhs.drift[static_cast<size_t>(row)].eval(xp, t);
        const double fm = rhs.drift[static_cast<size_t>(row)].eval(xm, t);
        row_sum += std::fabs(fp - fm) / (2.0 * dx);
      }
      worst = std::max(worst, row_sum);
    }
    int axis = 0;
    while (axis < d && idx[static_cast<size_t>(axis)] == n - 1) {
      idx[static_cast<size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == d) break;
    ++idx[static_cast<size_t>(axis)];
  }
  return 1.1 * worst;
}

InverseImageResult inverse_image_point(const InclusionRHS& rhs, double t, double h,
                                       const Vec& x0, const Vec& y_hat, double tol) {
  if (!(tol > 0.0)) throw InclusionError("inverse_image_point: tolerance must be positive");
  if (!rhs.disturbance.is_box())
    throw InclusionError("inverse_image_point: box disturbances only");
  const double contraction = rhs.lipschitz * h;
  if (!(contraction < 1.0))
    throw InclusionError("inverse_image_point: requires L*h < 1, got " +
                         std::to_string(contraction));

  InverseImageResult out;
  Vec x = x0;
  // projection of y onto the image box is the componentwise clamp, which
  // realizes the max-norm distance
  auto residual_of = [&](const Vec& xk) {
    const Box img = euler_image(rhs, t, xk, h).baked_box();
    Vec r(rhs.dim);
    for (int i = 0; i < rhs.dim; ++i) {
      const double proj = std::clamp(y_hat[i], img.lo[i], img.hi[i]);
      r[i] = y_hat[i] - proj;
    }
    return r;
  };

  Vec r = residual_of(x);
  double rn = norm_inf(r);
  out.residuals.push_back(rn);
  if (rn <= tol) {
    out.x_hat = x;
    return out;
  }

  long budget = 50;
  if (contraction > 1e-300) {
    const double steps = std::log(tol / rn) / std::log(contraction);
    if (steps > 0) budget += static_cast<long>(std::ceil(steps));
  }

  for (long k = 0; k < budget; ++k) {
    x = x + r;
    r = residual_of(x);
    rn = norm_inf(r);
    out.residuals.push_back(rn);
    if (rn <= tol) {
      out.x_hat = x;
      return out;
    }
  }
  throw InclusionError(
      "inverse_image_point: no convergence within the geometric budget; the declared "
      "Lipschitz constant is likely an underestimate");
}

}  // namespace reach
