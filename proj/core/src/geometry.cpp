#include "reach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace reach {

namespace {

constexpr double kTieRel = 1e-12;

double tie_abs(double w) { return kTieRel * std::max(1.0, std::fabs(w)); }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw GeometryError(std::string(what) + ": non-finite coordinate");
}

constexpr std::int64_t kIndexCap = 2000000000;  // int32 with headroom

std::int32_t checked_index(std::int64_t i) {
  if (i < -kIndexCap || i > kIndexCap)
    throw GeometryError("rasterization range exceeds index capacity");
  return static_cast<std::int32_t>(i);
}

// world-unit slack of x under face (negative outside), and the face's tie
double face_slack(const Halfspace& f, const Vec& x) {
  return (f.offset - dot(f.normal, x)) / norm_1(f.normal);
}

double face_tie(const Halfspace& f) {
  return kTieRel * std::max(1.0, std::fabs(f.offset) / norm_1(f.normal));
}

bool poly_contains_closed(const std::vector<Halfspace>& faces, const Vec& x) {
  for (const auto& f : faces)
    if (face_slack(f, x) < -face_tie(f)) return false;
  return true;
}

bool poly_strictly_inside(const std::vector<Halfspace>& faces, const Vec& x) {
  for (const auto& f : faces)
    if (!(face_slack(f, x) > face_tie(f))) return false;
  return true;
}

}  // namespace

Box make_box(const Vec& lo, const Vec& hi) {
  if (lo.dim != hi.dim) throw GeometryError("box: corner dimensions differ");
  for (int i = 0; i < lo.dim; ++i) {
    require_finite(lo[i], "box");
    require_finite(hi[i], "box");
    if (lo[i] > hi[i]) throw GeometryError("box: lo exceeds hi on axis " + std::to_string(i));
  }
  return Box{lo, hi};
}

Box box_at(const Vec& center, double radius) {
  if (radius < 0.0) throw GeometryError("box: negative radius");
  Vec lo(center.dim), hi(center.dim);
  for (int i = 0; i < center.dim; ++i) {
    lo[i] = center[i] - radius;
    hi[i] = center[i] + radius;
  }
  return Box{lo, hi};
}

void check_nonempty_interior(const HPolytope& p, int samples_per_axis) {
  const int d = p.bbox.dim();
  if (p.faces.empty()) throw GeometryError("polytope: no faces");
  for (const auto& f : p.faces) {
    if (f.normal.dim != d) throw GeometryError("polytope: face dimension mismatch");
    if (norm_1(f.normal) == 0.0) throw GeometryError("polytope: zero normal");
  }
  const int n = std::max(samples_per_axis, 2);
  std::array<int, kMaxDim> idx{};
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      double t = static_cast<double>(idx[static_cast<size_t>(i)]) / (n - 1);
      x[i] = p.bbox.lo[i] + t * (p.bbox.hi[i] - p.bbox.lo[i]);
    }
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& f : p.faces) slack = std::min(slack, face_slack(f, x));
    best = std::max(best, slack);
    if (best > 0.0) return;
    int axis = 0;
    while (axis < d && idx[static_cast<size_t>(axis)] == n - 1) {
      idx[static_cast<size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == d) break;
    ++idx[static_cast<size_t>(axis)];
  }
  throw GeometryError("polytope: no interior point found in bounding-box scan");
}

ConvexBody ConvexBody::from_box(const Box& b) {
  Box checked = make_box(b.lo, b.hi);
  return ConvexBody(checked, Vec(checked.dim()), 1.0);
}

ConvexBody ConvexBody::from_point(const Vec& p) { return from_box(Box{p, p}); }

ConvexBody ConvexBody::from_polytope(HPolytope p) {
  make_box(p.bbox.lo, p.bbox.hi);
  check_nonempty_interior(p);
  const int d = p.bbox.dim();
  return ConvexBody(std::move(p), Vec(d), 1.0);
}

ConvexBody ConvexBody::carried(const Vec& shift, double scale) const {
  if (shift.dim != dim()) throw GeometryError("carried: shift dimension mismatch");
  if (!(scale > 0.0)) throw GeometryError("carried: scale must be positive");
  for (int i = 0; i < shift.dim; ++i) require_finite(shift[i], "carried");
  // (s2, t2) after (s1, t1): y = t2 + s2*(t1 + s1*x)
  return ConvexBody(base_, shift + scale * shift_, scale * scale_);
}

int ConvexBody::dim() const {
  if (is_box()) return std::get<Box>(base_).dim();
  return std::get<HPolytope>(base_).bbox.dim();
}

Box ConvexBody::baked_box() const {
  const Box& b = std::get<Box>(base_);
  return Box{shift_ + scale_ * b.lo, shift_ + scale_ * b.hi};
}

HPolytope ConvexBody::baked_polytope() const {
  const HPolytope& p = std::get<HPolytope>(base_);
  HPolytope out;
  out.faces.reserve(p.faces.size());
  for (const auto& f : p.faces)
    out.faces.push_back(Halfspace{f.normal, scale_ * f.offset + dot(f.normal, shift_)});
  out.bbox = Box{shift_ + scale_ * p.bbox.lo, shift_ + scale_ * p.bbox.hi};
  return out;
}

Box ConvexBody::bounding_box() const {
  if (is_box()) return baked_box();
  return baked_polytope().bbox;
}

ConvexBody inflate(const ConvexBody& p, double alpha) {
  if (alpha < 0.0) throw GeometryError("inflate: negative radius");
  if (p.is_box()) {
    Box b = p.baked_box();
    for (int i = 0; i < b.dim(); ++i) {
      b.lo[i] -= alpha;
      b.hi[i] += alpha;
    }
    return ConvexBody(std::variant<Box, HPolytope>(b), Vec(b.dim()), 1.0);
  }
  HPolytope poly = p.baked_polytope();
  const int d = poly.bbox.dim();
  for (auto& f : poly.faces) f.offset += alpha * norm_1(f.normal);
  Box bb = poly.bbox;
  for (int i = 0; i < d; ++i) {
    bb.lo[i] -= alpha;
    bb.hi[i] += alpha;
  }
  // axis facets from the certified box keep the inflation bounded even when
  // the face offsets are not tight
  for (int i = 0; i < d; ++i) {
    Vec plus(d), minus(d);
    plus[i] = 1.0;
    minus[i] = -1.0;
    poly.faces.push_back(Halfspace{plus, bb.hi[i]});
    poly.faces.push_back(Halfspace{minus, -bb.lo[i]});
  }
  poly.bbox = bb;
  return ConvexBody(std::variant<Box, HPolytope>(std::move(poly)), Vec(d), 1.0);
}

std::optional<ConvexBody> erode(const ConvexBody& p, double alpha) {
  if (alpha < 0.0) throw GeometryError("erode: negative radius");
  if (p.is_box()) {
    Box b = p.baked_box();
    for (int i = 0; i < b.dim(); ++i) {
      b.lo[i] += alpha;
      b.hi[i] -= alpha;
      if (b.lo[i] > b.hi[i]) return std::nullopt;
    }
    return ConvexBody(std::variant<Box, HPolytope>(b), Vec(b.dim()), 1.0);
  }
  HPolytope poly = p.baked_polytope();
  const int d = poly.bbox.dim();
  for (auto& f : poly.faces) f.offset -= alpha * norm_1(f.normal);
  for (int i = 0; i < d; ++i) {
    poly.bbox.lo[i] += alpha;
    poly.bbox.hi[i] -= alpha;
    if (poly.bbox.lo[i] > poly.bbox.hi[i]) return std::nullopt;  // bbox proves emptiness
  }
  // an infeasible face system without bbox inversion is fine: it fails
  // every membership test downstream
  return ConvexBody(std::variant<Box, HPolytope>(std::move(poly)), Vec(d), 1.0);
}

bool contains(const ConvexBody& p, const Vec& x, double tol) {
  if (tol < 0.0) throw GeometryError("contains: negative tolerance");
  if (x.dim != p.dim()) throw GeometryError("contains: point dimension mismatch");
  if (p.is_box()) {
    Box b = p.baked_box();
    for (int i = 0; i < b.dim(); ++i)
      if (x[i] < b.lo[i] - tol || x[i] > b.hi[i] + tol) return false;
    return true;
  }
  for (const auto& f : p.baked_polytope().faces)
    if (dot(f.normal, x) > f.offset + tol * norm_1(f.normal)) return false;
  return true;
}

double dist_boundary(const ConvexBody& p, const Vec& x, double bisect_tol) {
  if (x.dim != p.dim()) throw GeometryError("dist_boundary: point dimension mismatch");
  if (p.is_box()) {
    Box b = p.baked_box();
    double excess = 0.0, margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < b.dim(); ++i) {
      excess = std::max({excess, b.lo[i] - x[i], x[i] - b.hi[i]});
      margin = std::min({margin, x[i] - b.lo[i], b.hi[i] - x[i]});
    }
    return excess > 0.0 ? excess : margin;
  }
  HPolytope poly = p.baked_polytope();
  // the certified box facets are part of the inflation semantics, so the
  // exterior distance has to respect them as well
  for (int i = 0; i < poly.bbox.dim(); ++i) {
    Vec plus(poly.bbox.dim()), minus(poly.bbox.dim());
    plus[i] = 1.0;
    minus[i] = -1.0;
    poly.faces.push_back(Halfspace{plus, poly.bbox.hi[i]});
    poly.faces.push_back(Halfspace{minus, -poly.bbox.lo[i]});
  }
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& f : poly.faces) min_slack = std::min(min_slack, face_slack(f, x));
  if (min_slack >= 0.0) return min_slack;  // inscribed-ball radius at x

  // exterior: smallest r with x in the r-inflation, by bisection
  double lo = -min_slack;  // every violated face needs at least this much
  Vec c = poly.bbox.center();
  double hw = 0.0;
  for (int i = 0; i < poly.bbox.dim(); ++i) hw = std::max(hw, poly.bbox.half_width(i));
  double hi = std::max(lo, norm_inf(x - c) + hw);
  auto member_at = [&](double r) {
    for (const auto& f : poly.faces)
      if (face_slack(f, x) + r < 0.0) return false;
    return true;
  };
  while (!member_at(hi)) hi *= 2.0;  // safety, lo/hi bounds should already bracket
  const double tol = std::max(bisect_tol, 1e-15);
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (member_at(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// index helpers

std::int64_t first_index_ge(double w, double rho) {
  require_finite(w, "index");
  const double thr = w - tie_abs(w);
  auto i = static_cast<std::int64_t>(std::ceil(thr / rho));
  while (rho * static_cast<double>(i) < thr) ++i;
  while (rho * static_cast<double>(i - 1) >= thr) --i;
  return i;
}

std::int64_t last_index_le(double w, double rho) {
  require_finite(w, "index");
  const double thr = w + tie_abs(w);
  auto i = static_cast<std::int64_t>(std::floor(thr / rho));
  while (rho * static_cast<double>(i) > thr) --i;
  while (rho * static_cast<double>(i + 1) <= thr) ++i;
  return i;
}

std::int64_t first_index_gt(double w, double rho) {
  require_finite(w, "index");
  const double thr = w + tie_abs(w);
  auto i = static_cast<std::int64_t>(std::floor(thr / rho)) + 1;
  while (rho * static_cast<double>(i) <= thr) ++i;
  while (rho * static_cast<double>(i - 1) > thr) --i;
  return i;
}

std::int64_t last_index_lt(double w, double rho) {
  require_finite(w, "index");
  const double thr = w - tie_abs(w);
  auto i = static_cast<std::int64_t>(std::ceil(thr / rho)) - 1;
  while (rho * static_cast<double>(i) >= thr) --i;
  while (rho * static_cast<double>(i + 1) < thr) ++i;
  return i;
}

// ---------------------------------------------------------------------------
// RowUnion

std::size_t RowUnion::RowKeyHash::operator()(const RowKey& k) const noexcept {
  std::uint64_t a = 0, b = 0;
  std::memcpy(&a, k.t.data(), 8);
  std::memcpy(&b, k.t.data() + 2, 4);
  std::uint64_t h = a * 0x9E3779B97F4A7C15ull;
  h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  h *= 0xC2B2AE3D27D4EB4Full;
  h ^= h >> 29;
  return static_cast<std::size_t>(h);
}

RowUnion::RowKey RowUnion::key_of(const GridIndex& g) const {
  RowKey k;
  for (int i = 1; i < dim_; ++i) k.t[static_cast<size_t>(i - 1)] = g[i];
  return k;
}

void RowUnion::add_run(const GridIndex& cell0, std::int32_t hi0) {
  normalized_ = false;
  const RowKey k = key_of(cell0);
  Row* row;
  if (memo_row_ != nullptr && k == memo_key_) {
    row = memo_row_;
  } else {
    row = &rows_[k];
    memo_key_ = k;
    memo_row_ = row;
  }
  const std::int32_t lo0 = cell0[0];
  if (!row->runs.empty()) {
    CellRun& bk = row->runs.back();
    if (lo0 >= bk.lo) {
      if (static_cast<std::int64_t>(lo0) <= static_cast<std::int64_t>(bk.hi) + 1) {
        if (hi0 > bk.hi) bk.hi = hi0;
        return;
      }
      row->runs.push_back({lo0, hi0});
      return;
    }
    row->sorted = false;
  }
  row->runs.push_back({lo0, hi0});
}

void RowUnion::absorb(RowUnion&& other) {
  if (other.rows_.empty()) return;
  if (dim_ == 0) {
    dim_ = other.dim_;
    rho_ = other.rho_;
  }
  normalized_ = false;
  memo_row_ = nullptr;
  for (auto& [k, row] : other.rows_) {
    auto it = rows_.find(k);
    if (it == rows_.end()) {
      rows_.emplace(k, std::move(row));
    } else {
      it->second.runs.insert(it->second.runs.end(), row.runs.begin(), row.runs.end());
      it->second.sorted = false;
    }
  }
  other.rows_.clear();
  other.memo_row_ = nullptr;
}

void RowUnion::normalize() {
  for (auto& [k, row] : rows_) {
    if (row.sorted) continue;
    std::sort(row.runs.begin(), row.runs.end(),
              [](const CellRun& a, const CellRun& b) {
                return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
              });
    std::vector<CellRun> merged;
    merged.reserve(row.runs.size());
    for (const auto& r : row.runs) {
      if (!merged.empty() &&
          static_cast<std::int64_t>(r.lo) <= static_cast<std::int64_t>(merged.back().hi) + 1) {
        merged.back().hi = std::max(merged.back().hi, r.hi);
      } else {
        merged.push_back(r);
      }
    }
    row.runs = std::move(merged);
    row.sorted = true;
  }
  normalized_ = true;
}

std::size_t RowUnion::cell_count() const {
  if (!normalized_) throw GeometryError("RowUnion: cell_count before normalize");
  std::size_t n = 0;
  for (const auto& [k, row] : rows_)
    for (const auto& r : row.runs)
      n += static_cast<std::size_t>(r.hi - r.lo + 1);
  return n;
}

GridSet RowUnion::materialize() const {
  if (!normalized_) throw GeometryError("RowUnion: materialize before normalize");
  GridSet out(dim_ > 0 ? dim_ : 1, rho_ > 0 ? rho_ : 1.0);
  out.reserve(cell_count());
  for (const auto& [k, row] : rows_) {
    GridIndex g;
    for (int i = 1; i < dim_; ++i) g[i] = k.t[static_cast<size_t>(i - 1)];
    for (const auto& r : row.runs)
      for (std::int32_t x = r.lo; x <= r.hi; ++x) {
        g[0] = x;
        out.insert(g);
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// accumulation

namespace {

struct AxisRange {
  std::int32_t lo = 0, hi = -1;
  bool empty() const { return lo > hi; }
};

// closed cells of the world interval [wlo, whi]
AxisRange closed_range(double wlo, double whi, double rho) {
  AxisRange r;
  const std::int64_t a = first_index_ge(wlo, rho);
  const std::int64_t b = last_index_le(whi, rho);
  if (a > b) return r;
  r.lo = checked_index(a);
  r.hi = checked_index(b);
  return r;
}

// cells strictly inside the world interval (wlo, whi)
AxisRange strict_range(double wlo, double whi, double rho) {
  AxisRange r;
  const std::int64_t a = first_index_gt(wlo, rho);
  const std::int64_t b = last_index_lt(whi, rho);
  if (a > b) return r;
  r.lo = checked_index(a);
  r.hi = checked_index(b);
  return r;
}

AxisRange intersect(const AxisRange& a, const AxisRange& b) {
  AxisRange r;
  r.lo = std::max(a.lo, b.lo);
  r.hi = std::min(a.hi, b.hi);
  if (r.lo > r.hi) {
    r.lo = 0;
    r.hi = -1;
  }
  return r;
}

// rows of the index box `outer`, minus the (possibly absent) strict-interior
// index box `hole`
void emit_box_rows(const std::array<AxisRange, kMaxDim>& outer,
                   const std::array<AxisRange, kMaxDim>* hole, int dim, RowUnion& acc) {
  for (int i = 0; i < dim; ++i)
    if (outer[static_cast<size_t>(i)].empty()) return;

  bool hole_possible = hole != nullptr;
  if (hole_possible)
    for (int i = 0; i < dim; ++i)
      if ((*hole)[static_cast<size_t>(i)].empty()) hole_possible = false;

  GridIndex g;
  std::array<std::int32_t, kMaxDim> cur{};
  for (int i = 1; i < dim; ++i) cur[static_cast<size_t>(i)] = outer[static_cast<size_t>(i)].lo;

  const AxisRange& ox = outer[0];
  for (;;) {
    for (int i = 1; i < dim; ++i) g[i] = cur[static_cast<size_t>(i)];
    bool row_in_hole = hole_possible;
    if (row_in_hole)
      for (int i = 1; i < dim; ++i) {
        const AxisRange& h = (*hole)[static_cast<size_t>(i)];
        if (cur[static_cast<size_t>(i)] < h.lo || cur[static_cast<size_t>(i)] > h.hi) {
          row_in_hole = false;
          break;
        }
      }
    if (!row_in_hole) {
      g[0] = ox.lo;
      acc.add_run(g, ox.hi);
    } else {
      const AxisRange& hx = (*hole)[0];
      if (ox.lo <= hx.lo - 1) {
        g[0] = ox.lo;
        acc.add_run(g, std::min(ox.hi, hx.lo - 1));
      }
      if (hx.hi + 1 <= ox.hi) {
        g[0] = std::max(ox.lo, hx.hi + 1);
        acc.add_run(g, ox.hi);
      }
    }
    // advance trailing odometer
    int axis = 1;
    while (axis < dim && cur[static_cast<size_t>(axis)] == outer[static_cast<size_t>(axis)].hi) {
      cur[static_cast<size_t>(axis)] = outer[static_cast<size_t>(axis)].lo;
      ++axis;
    }
    if (axis >= dim) break;
    ++cur[static_cast<size_t>(axis)];
  }
}

void box_outer_ranges(const Box& b, double alpha, double rho,
                      std::array<AxisRange, kMaxDim>& out) {
  for (int i = 0; i < b.dim(); ++i)
    out[static_cast<size_t>(i)] = closed_range(b.lo[i] - alpha, b.hi[i] + alpha, rho);
}

// strict cells of the erosion of `b` by `erosion`; false when the erosion
// is empty (no hole)
bool box_hole_ranges(const Box& b, double erosion, double rho,
                     const std::array<AxisRange, kMaxDim>& outer,
                     std::array<AxisRange, kMaxDim>& out) {
  for (int i = 0; i < b.dim(); ++i) {
    const double elo = b.lo[i] + erosion;
    const double ehi = b.hi[i] - erosion;
    if (elo > ehi) return false;
    out[static_cast<size_t>(i)] =
        intersect(strict_range(elo, ehi, rho), outer[static_cast<size_t>(i)]);
    if (out[static_cast<size_t>(i)].empty()) return false;
  }
  return true;
}

void scan_polytope(const ConvexBody& inflated, const std::optional<ConvexBody>& eroded,
                   double rho, RowUnion& acc) {
  const HPolytope poly = inflated.baked_polytope();
  const int d = poly.bbox.dim();
  std::vector<Halfspace> eroded_faces;
  if (eroded) eroded_faces = eroded->baked_polytope().faces;

  std::array<AxisRange, kMaxDim> range{};
  for (int i = 0; i < d; ++i)
    range[static_cast<size_t>(i)] = closed_range(poly.bbox.lo[i], poly.bbox.hi[i], rho);
  for (int i = 0; i < d; ++i)
    if (range[static_cast<size_t>(i)].empty()) return;

  GridIndex g;
  for (int i = 0; i < d; ++i) g[i] = range[static_cast<size_t>(i)].lo;
  for (;;) {
    const Vec w = world_point(g, d, rho);
    if (poly_contains_closed(poly.faces, w) &&
        !(eroded && poly_strictly_inside(eroded_faces, w)))
      acc.add_cell(g);
    int axis = 0;
    while (axis < d && g[axis] == range[static_cast<size_t>(axis)].hi) {
      g[axis] = range[static_cast<size_t>(axis)].lo;
      ++axis;
    }
    if (axis == d) break;
    ++g[axis];
  }
}

}  // namespace

void accumulate_cells(const ConvexBody& p, double alpha, double rho, RowUnion& acc) {
  if (alpha < 0.0) throw GeometryError("rasterize: negative blowup");
  if (!(rho > 0.0)) throw GeometryError("rasterize: spacing must be positive");
  if (p.is_box()) {
    std::array<AxisRange, kMaxDim> outer{};
    box_outer_ranges(p.baked_box(), alpha, rho, outer);
    emit_box_rows(outer, nullptr, p.dim(), acc);
    return;
  }
  scan_polytope(inflate(p, alpha), std::nullopt, rho, acc);
}

void accumulate_boundary_cells(const ConvexBody& p, double alpha, double rho, RowUnion& acc) {
  accumulate_band_clipped_cells(p, alpha, 0.0, rho, acc);
}

void accumulate_band_clipped_cells(const ConvexBody& p, double alpha, double kappa,
                                   double rho, RowUnion& acc) {
  if (alpha < 0.0 || kappa < 0.0) throw GeometryError("rasterize: negative blowup");
  if (!(rho > 0.0)) throw GeometryError("rasterize: spacing must be positive");
  const double erosion = alpha + kappa;
  if (p.is_box()) {
    const Box b = p.baked_box();
    std::array<AxisRange, kMaxDim> outer{}, hole{};
    box_outer_ranges(b, alpha, rho, outer);
    const bool has_hole = box_hole_ranges(b, erosion, rho, outer, hole);
    emit_box_rows(outer, has_hole ? &hole : nullptr, p.dim(), acc);
    return;
  }
  scan_polytope(inflate(p, alpha), erode(p, erosion), rho, acc);
}

GridSet rasterize(const ConvexBody& p, double alpha, double rho) {
  RowUnion acc(p.dim(), rho);
  accumulate_cells(p, alpha, rho, acc);
  acc.normalize();
  return acc.materialize();
}

GridSet rasterize_boundary(const ConvexBody& p, double alpha, double rho) {
  RowUnion acc(p.dim(), rho);
  accumulate_boundary_cells(p, alpha, rho, acc);
  acc.normalize();
  return acc.materialize();
}

}  // namespace reach
