#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "reach/grid.hpp"

namespace reach {

// Fixed-capacity coordinate vector for world-space points. Keeps hot loops
// allocation-free; dimension is runtime but capped at kMaxDim.
struct Vec {
  int dim = 0;
  std::array<double, kMaxDim> c{};

  Vec() = default;
  explicit Vec(int d) : dim(d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("Vec: bad dimension");
  }
  Vec(std::initializer_list<double> init) {
    for (auto v : init) {
      if (dim >= kMaxDim) throw std::invalid_argument("Vec: too many coordinates");
      c[static_cast<size_t>(dim++)] = v;
    }
  }

  double operator[](int i) const { return c[static_cast<size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<size_t>(i)]; }

  friend Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] + b[i];
    return r;
  }
  friend Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
    return r;
  }
  friend Vec operator*(double s, const Vec& a) {
    Vec r(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = s * a[i];
    return r;
  }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }
};

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (int i = 0; i < a.dim; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

inline double norm_1(const Vec& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += std::fabs(a[i]);
  return s;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}

inline Vec world_point(const GridIndex& g, int dim, double rho) {
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = rho * static_cast<double>(g[i]);
  return w;
}

}  // namespace reach
