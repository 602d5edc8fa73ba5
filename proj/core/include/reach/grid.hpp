#pragma once

// Sparse subsets of the lattice rho*Z^d, stored as hashed integer indices.
// Provides the discrete boundary/interior layers, chain connectivity,
// Chebyshev Hausdorff distances and the adjacency filters the steppers
// are built from. All distances between cells are measured in the
// max-norm; an index step of 1 corresponds to a world distance of rho.

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace reach {

inline constexpr int kMaxDim = 4;

class GridError : public std::runtime_error {
 public:
  explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

// Lattice index. World position of a cell is rho * coords; the dimension
// is carried by the owning GridSet, unused trailing coordinates stay zero
// so that hashing and comparison can look at the whole array.
struct GridIndex {
  std::array<std::int32_t, kMaxDim> c{};

  GridIndex() = default;
  GridIndex(std::initializer_list<std::int32_t> init) {
    int i = 0;
    for (auto v : init) {
      if (i >= kMaxDim) throw GridError("GridIndex: too many coordinates");
      c[i++] = v;
    }
  }

  std::int32_t operator[](int i) const { return c[static_cast<size_t>(i)]; }
  std::int32_t& operator[](int i) { return c[static_cast<size_t>(i)]; }

  friend bool operator==(const GridIndex& a, const GridIndex& b) { return a.c == b.c; }
  friend bool operator!=(const GridIndex& a, const GridIndex& b) { return a.c != b.c; }
  // lexicographic, used for deterministic output ordering
  friend bool operator<(const GridIndex& a, const GridIndex& b) { return a.c < b.c; }
};

struct GridIndexHash {
  std::size_t operator()(const GridIndex& g) const noexcept {
    std::uint64_t a, b;
    std::memcpy(&a, g.c.data(), 8);
    std::memcpy(&b, g.c.data() + 2, 8);
    std::uint64_t h = a * 0x9E3779B97F4A7C15ull;
    h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h *= 0xC2B2AE3D27D4EB4Full;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

// Finite set of lattice indices with a fixed dimension and spacing.
// Membership is exact integer comparison; rho only enters when converting
// to world coordinates. Queries are const and safe for concurrent use;
// mutation is confined to the construction phase.
class GridSet {
 public:
  using Storage = std::unordered_set<GridIndex, GridIndexHash>;
  using const_iterator = Storage::const_iterator;

  GridSet() : dim_(0), spacing_(0.0) {}
  GridSet(int dim, double spacing) : dim_(dim), spacing_(spacing) {
    if (dim < 1 || dim > kMaxDim)
      throw GridError("GridSet: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (!(spacing > 0.0)) throw GridError("GridSet: spacing must be positive");
  }

  int dim() const { return dim_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  bool contains(const GridIndex& g) const { return cells_.find(g) != cells_.end(); }
  void insert(const GridIndex& g) { cells_.insert(g); }
  void erase(const GridIndex& g) { cells_.erase(g); }
  void reserve(std::size_t n) { cells_.reserve(n); }
  void clear() { cells_.clear(); }

  const_iterator begin() const { return cells_.begin(); }
  const_iterator end() const { return cells_.end(); }

  std::vector<GridIndex> sorted_cells() const;

  friend bool operator==(const GridSet& a, const GridSet& b) {
    return a.dim_ == b.dim_ && a.cells_ == b.cells_;
  }

 private:
  int dim_;
  double spacing_;
  Storage cells_;
};

// The state the boundary Euler scheme carries between steps: the discrete
// boundary and the first exterior layer of the (implicit) reachable set.
struct BoundaryState {
  GridSet boundary;  // layer 0
  GridSet outer;     // layer +1
  long step_index = 0;

  // throws GridError if the two layers overlap or the outer layer is not
  // glued to the boundary
  void check_invariants() const;
};

// Chebyshev-adjacent indices, 3^d - 1 of them.
std::vector<GridIndex> neighbors(const GridIndex& p, int dim);

// Allocation-free neighbor loop for hot paths.
template <typename Fn>
inline void for_each_neighbor(const GridIndex& p, int dim, Fn&& fn) {
  GridIndex q = p;
  // odometer over offsets {-1,0,1}^dim, skipping the all-zero offset
  std::array<int, kMaxDim> off{};
  for (int i = 0; i < dim; ++i) off[static_cast<size_t>(i)] = -1;
  for (;;) {
    bool zero = true;
    for (int i = 0; i < dim; ++i) {
      q[i] = p[i] + off[static_cast<size_t>(i)];
      if (off[static_cast<size_t>(i)] != 0) zero = false;
    }
    if (!zero) fn(q);
    int axis = 0;
    while (axis < dim && off[static_cast<size_t>(axis)] == 1) {
      off[static_cast<size_t>(axis)] = -1;
      ++axis;
    }
    if (axis == dim) break;
    ++off[static_cast<size_t>(axis)];
  }
}

// Discrete layers of a finite set M:
//   k = 0   : cells of M with a neighbor outside M
//   k >= 1  : cells outside M at Chebyshev index distance exactly k from layer 0
//   k <= -1 : cells of M at distance exactly |k| from layer 0
// interior is M minus layer 0.
struct Layers {
  std::map<int, GridSet> by_k;
  GridSet interior;

  const GridSet& layer(int k) const;
};

Layers extract_layers(const GridSet& m, int k_lo, int k_hi);

// Recovers (layer -1, layer +2) from (layer 0, layer +1) without seeing M.
// Every exterior neighbor of layer 0 lies in layer 1 and every M-neighbor
// of layer 1 lies in layer 0, so the neighbor unions minus the two known
// layers split exactly into the inner layer and the second exterior ring.
std::pair<GridSet, GridSet> derive_adjacent_layers(const GridSet& b0, const GridSet& b1);

// Chain connectivity: consecutive cells at Chebyshev index distance 1
// (diagonal steps allowed). Empty and singleton sets are chain-connected.
bool is_chain_connected(const GridSet& m);

// Maximal chain-connected subsets, ordered by their lexicographically
// smallest member.
std::vector<GridSet> connected_components(const GridSet& m);

// Symmetric Hausdorff distance in world units (rho times the integer
// Chebyshev Hausdorff distance). Throws GridError on empty operands.
double hausdorff(const GridSet& a, const GridSet& b);

// One-sided variant, sup over a of dist(a, b), world units.
double hausdorff_one_sided(const GridSet& a, const GridSet& b);

// { x in s : x not in t and some neighbor of x is in t } -- the grid
// meaning of dist(x, t) == rho.
GridSet adjacent_filter(const GridSet& s, const GridSet& t);

GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_intersection(const GridSet& a, const GridSet& b);
GridSet set_difference(const GridSet& a, const GridSet& b);
GridSet symmetric_difference(const GridSet& a, const GridSet& b);

// CSV cell dump: "# d=<dim> rho=<spacing> kind=<kind>" then one line of
// comma-separated indices per cell, lexicographically sorted.
void write_cells_csv(std::ostream& os, const GridSet& s, const std::string& kind);
GridSet read_cells_csv(std::istream& is, std::string* kind_out = nullptr);

}  // namespace reach
