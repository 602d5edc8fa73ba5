#pragma once

// Convex bodies in the max-norm (axis-aligned boxes and H-polytopes)
// together with their rasterization onto the lattice rho*Z^d. Dilation and
// erosion are exact for boxes and for H-polytopes with tight offsets; the
// looseness introduced by the bounding-box facets of an inflated polytope
// is an admissible overapproximation that callers budget for separately.
//
// Tie handling: all balls are closed; a grid point at distance exactly
// alpha from a body is included. Comparisons use a relative epsilon of
// 1e-12 on world coordinates, applied through one set of index helpers so
// that every rasterization path makes identical decisions.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "reach/grid.hpp"
#include "reach/vec.hpp"

namespace reach {

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

struct Box {
  Vec lo, hi;

  int dim() const { return lo.dim; }
  Vec center() const { return 0.5 * (lo + hi); }
  double half_width(int i) const { return 0.5 * (hi[i] - lo[i]); }
};

// Checks lo <= hi componentwise (degenerate zero-width faces allowed).
Box make_box(const Vec& lo, const Vec& hi);
Box box_at(const Vec& center, double radius);

struct Halfspace {
  Vec normal;     // a
  double offset;  // b, meaning a . x <= b
};

struct HPolytope {
  std::vector<Halfspace> faces;
  Box bbox;  // certified enclosing box, redundant w.r.t. the faces
};

// One-shot all-over scan of the bounding box for a point with positive
// slack on every face; rejects polytopes without a detectable interior.
void check_nonempty_interior(const HPolytope& p, int samples_per_axis = 33);

// Convex compact body: a box or polytope base carried by an affine map
// y = shift + scale * x with scale > 0. The carrier is resolved exactly
// when the body is queried, so euler images x + h*f + h*U stay closed-form.
class ConvexBody {
 public:
  static ConvexBody from_box(const Box& b);
  static ConvexBody from_point(const Vec& p);
  static ConvexBody from_polytope(HPolytope p);

  // composes an outer affine map y = shift + scale * x onto this body
  ConvexBody carried(const Vec& shift, double scale) const;

  int dim() const;
  bool is_box() const { return std::holds_alternative<Box>(base_); }

  // carrier-resolved geometry
  Box baked_box() const;            // requires is_box()
  HPolytope baked_polytope() const; // requires !is_box()
  Box bounding_box() const;

  const Vec& shift() const { return shift_; }
  double scale() const { return scale_; }

 private:
  ConvexBody(std::variant<Box, HPolytope> base, Vec shift, double scale)
      : base_(std::move(base)), shift_(shift), scale_(scale) {}

  friend ConvexBody inflate(const ConvexBody&, double);
  friend std::optional<ConvexBody> erode(const ConvexBody&, double);

  std::variant<Box, HPolytope> base_;
  Vec shift_;
  double scale_;
};

// Minkowski sum with the closed alpha-ball: B_alpha(P).
ConvexBody inflate(const ConvexBody& p, double alpha);

// Erosion P (-) alpha*B; nullopt when the result is certifiably empty
// (boxes only -- an infeasible eroded polytope simply fails every
// membership test, which is all downstream consumers need).
std::optional<ConvexBody> erode(const ConvexBody& p, double alpha);

// Membership with all defining inequalities relaxed by tol (world units;
// polytope faces are relaxed by tol * |a|_1).
bool contains(const ConvexBody& p, const Vec& x, double tol = 0.0);

// dist(x, boundary of P) in the max-norm. Closed-form for boxes and for
// interior points of polytopes; exterior polytope queries bisect on the
// inflation radius down to bisect_tol.
double dist_boundary(const ConvexBody& p, const Vec& x, double bisect_tol = 1e-9);

// ---------------------------------------------------------------------------
// Rasterization. Cell sets are assembled as unions of runs along axis 0,
// grouped by the trailing coordinates ("rows"). Runs from overlapping
// images merge eagerly, so building the union of many nearby images costs
// close to the size of the result rather than the sum of the parts. The
// canonical normalized form is independent of insertion order, which makes
// sharded parallel accumulation deterministic.

struct CellRun {
  std::int32_t lo, hi;  // inclusive index range along axis 0
};

class RowUnion {
 public:
  RowUnion() : dim_(0), rho_(0) {}
  RowUnion(int dim, double rho) : dim_(dim), rho_(rho) {}

  int dim() const { return dim_; }
  double rho() const { return rho_; }

  // adds the run cell0[0]..hi0 in the row addressed by cell0's trailing coords
  void add_run(const GridIndex& cell0, std::int32_t hi0);
  void add_cell(const GridIndex& g) { add_run(g, g[0]); }

  // moves all runs of `other` into this accumulator
  void absorb(RowUnion&& other);

  // canonical form: per row, runs sorted, disjoint and maximal
  void normalize();

  std::size_t cell_count() const;  // requires normalize()
  GridSet materialize() const;     // requires normalize()

  bool empty() const { return rows_.empty(); }

 private:
  struct RowKey {
    std::array<std::int32_t, kMaxDim - 1> t{};
    friend bool operator==(const RowKey& a, const RowKey& b) { return a.t == b.t; }
  };
  struct RowKeyHash {
    std::size_t operator()(const RowKey& k) const noexcept;
  };
  struct Row {
    std::vector<CellRun> runs;
    bool sorted = true;
  };

  RowKey key_of(const GridIndex& g) const;

  int dim_;
  double rho_;
  std::unordered_map<RowKey, Row, RowKeyHash> rows_;
  RowKey memo_key_{};
  Row* memo_row_ = nullptr;
  bool normalized_ = true;
};

// Index helpers implementing the closed/strict tie rule on one axis.
std::int64_t first_index_ge(double w, double rho);   // min i with rho*i >= w - tie
std::int64_t last_index_le(double w, double rho);    // max i with rho*i <= w + tie
std::int64_t first_index_gt(double w, double rho);   // min i with rho*i >  w + tie
std::int64_t last_index_lt(double w, double rho);    // max i with rho*i <  w - tie

// Cells of B_alpha(P): grid indices whose world point lies in inflate(P, alpha).
void accumulate_cells(const ConvexBody& p, double alpha, double rho, RowUnion& acc);

// Cells of B_alpha(boundary of P) = B_alpha(P) minus the strict interior of
// the erosion P (-) alpha*B.
void accumulate_boundary_cells(const ConvexBody& p, double alpha, double rho, RowUnion& acc);

// Cells of B_alpha(P) that are NOT strictly inside P (-) (alpha+kappa)*B,
// i.e. the image clipped to the kappa-band around its own boundary.
void accumulate_band_clipped_cells(const ConvexBody& p, double alpha, double kappa,
                                   double rho, RowUnion& acc);

GridSet rasterize(const ConvexBody& p, double alpha, double rho);
GridSet rasterize_boundary(const ConvexBody& p, double alpha, double rho);

}  // namespace reach
