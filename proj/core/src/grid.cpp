#include "reach/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace reach {

namespace {

void require_compatible(const GridSet& a, const GridSet& b, const char* op) {
  if (a.dim() != b.dim())
    throw GridError(std::string(op) + ": operands have different dimensions");
  if (a.spacing() != b.spacing())
    throw GridError(std::string(op) + ": operands have different spacings");
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<GridIndex> GridSet::sorted_cells() const {
  std::vector<GridIndex> out(cells_.begin(), cells_.end());
  std::sort(out.begin(), out.end());
  return out;
}

void BoundaryState::check_invariants() const {
  require_compatible(boundary, outer, "BoundaryState");
  for (const auto& g : outer) {
    if (boundary.contains(g)) throw GridError("BoundaryState: layers overlap");
    bool touches = false;
    for_each_neighbor(g, boundary.dim(), [&](const GridIndex& q) {
      if (boundary.contains(q)) touches = true;
    });
    if (!touches) throw GridError("BoundaryState: outer cell not adjacent to boundary");
  }
}

std::vector<GridIndex> neighbors(const GridIndex& p, int dim) {
  std::vector<GridIndex> out;
  out.reserve(dim == 1 ? 2 : dim == 2 ? 8 : 26);
  for_each_neighbor(p, dim, [&](const GridIndex& q) { out.push_back(q); });
  return out;
}

const GridSet& Layers::layer(int k) const {
  auto it = by_k.find(k);
  if (it == by_k.end()) throw GridError("Layers: layer " + std::to_string(k) + " not extracted");
  return it->second;
}

Layers extract_layers(const GridSet& m, int k_lo, int k_hi) {
  if (k_lo > 0 || k_hi < 0) throw GridError("extract_layers: need k_lo <= 0 <= k_hi");
  const int dim = m.dim() > 0 ? m.dim() : 1;
  const double rho = m.spacing() > 0 ? m.spacing() : 1.0;

  Layers out;
  out.interior = GridSet(dim, rho);
  for (int k = k_lo; k <= k_hi; ++k) out.by_k.emplace(k, GridSet(dim, rho));
  if (m.empty()) return out;

  GridSet& b0 = out.by_k.at(0);
  for (const auto& g : m) {
    bool exposed = false;
    for_each_neighbor(g, dim, [&](const GridIndex& q) {
      if (!exposed && !m.contains(q)) exposed = true;
    });
    if (exposed)
      b0.insert(g);
    else
      out.interior.insert(g);
  }

  // Chebyshev distance-k shells around layer 0 by repeated unit dilation;
  // each shell splits into an exterior layer (outside M) and an interior
  // layer (inside M).
  const int k_max = std::max(k_hi, -k_lo);
  if (k_max == 0) return out;

  GridSet visited = b0;
  std::vector<GridIndex> frontier(b0.begin(), b0.end());
  for (int k = 1; k <= k_max && !frontier.empty(); ++k) {
    std::vector<GridIndex> next;
    for (const auto& g : frontier) {
      for_each_neighbor(g, dim, [&](const GridIndex& q) {
        if (visited.contains(q)) return;
        visited.insert(q);
        next.push_back(q);
      });
    }
    for (const auto& q : next) {
      const bool inside = m.contains(q);
      if (!inside && k <= k_hi)
        out.by_k.at(k).insert(q);
      else if (inside && -k >= k_lo)
        out.by_k.at(-k).insert(q);
    }
    frontier = std::move(next);
  }
  return out;
}

std::pair<GridSet, GridSet> derive_adjacent_layers(const GridSet& b0, const GridSet& b1) {
  require_compatible(b0, b1, "derive_adjacent_layers");
  const int dim = b0.dim();
  GridSet inner(dim, b0.spacing());
  GridSet outer2(dim, b0.spacing());
  for (const auto& g : b0) {
    for_each_neighbor(g, dim, [&](const GridIndex& q) {
      if (!b0.contains(q) && !b1.contains(q)) inner.insert(q);
    });
  }
  for (const auto& g : b1) {
    for_each_neighbor(g, dim, [&](const GridIndex& q) {
      if (!b0.contains(q) && !b1.contains(q) && !inner.contains(q)) outer2.insert(q);
    });
  }
  return {std::move(inner), std::move(outer2)};
}

namespace {

// BFS flood over in-set Chebyshev neighbors starting from `seed`.
GridSet flood_component(const GridSet& m, const GridIndex& seed, GridSet& visited) {
  GridSet comp(m.dim(), m.spacing());
  std::deque<GridIndex> queue;
  queue.push_back(seed);
  visited.insert(seed);
  comp.insert(seed);
  while (!queue.empty()) {
    GridIndex g = queue.front();
    queue.pop_front();
    for_each_neighbor(g, m.dim(), [&](const GridIndex& q) {
      if (!m.contains(q) || visited.contains(q)) return;
      visited.insert(q);
      comp.insert(q);
      queue.push_back(q);
    });
  }
  return comp;
}

}  // namespace

bool is_chain_connected(const GridSet& m) {
  if (m.size() <= 1) return true;
  GridSet visited(m.dim(), m.spacing());
  GridSet comp = flood_component(m, *m.begin(), visited);
  return comp.size() == m.size();
}

std::vector<GridSet> connected_components(const GridSet& m) {
  std::vector<GridSet> out;
  if (m.empty()) return out;
  GridSet visited(m.dim(), m.spacing());
  std::vector<std::pair<GridIndex, std::size_t>> anchors;  // smallest member -> index in out
  for (const auto& g : m) {
    if (visited.contains(g)) continue;
    GridSet comp = flood_component(m, g, visited);
    GridIndex smallest = *comp.begin();
    for (const auto& q : comp)
      if (q < smallest) smallest = q;
    anchors.emplace_back(smallest, out.size());
    out.push_back(std::move(comp));
  }
  std::sort(anchors.begin(), anchors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<GridSet> ordered;
  ordered.reserve(out.size());
  for (const auto& [_, idx] : anchors) ordered.push_back(std::move(out[idx]));
  return ordered;
}

double hausdorff_one_sided(const GridSet& a, const GridSet& b) {
  require_compatible(a, b, "hausdorff");
  if (a.empty() || b.empty()) throw GridError("undefined Hausdorff distance: empty operand");

  // Dilate b shell by shell until all of a is covered; the last shell that
  // still covered a fresh cell of a gives the integer distance.
  std::size_t covered = 0;
  for (const auto& g : a)
    if (b.contains(g)) ++covered;
  if (covered == a.size()) return 0.0;

  GridSet visited = b;
  std::vector<GridIndex> frontier(b.begin(), b.end());
  long k = 0;
  while (covered < a.size()) {
    ++k;
    std::vector<GridIndex> next;
    for (const auto& g : frontier) {
      for_each_neighbor(g, a.dim(), [&](const GridIndex& q) {
        if (visited.contains(q)) return;
        visited.insert(q);
        next.push_back(q);
        if (a.contains(q)) ++covered;
      });
    }
    if (next.empty()) throw GridError("hausdorff: dilation stalled");  // unreachable for finite sets
    frontier = std::move(next);
  }
  return static_cast<double>(k) * a.spacing();
}

double hausdorff(const GridSet& a, const GridSet& b) {
  return std::max(hausdorff_one_sided(a, b), hausdorff_one_sided(b, a));
}

GridSet adjacent_filter(const GridSet& s, const GridSet& t) {
  require_compatible(s, t, "adjacent_filter");
  GridSet out(s.dim(), s.spacing());
  for (const auto& g : s) {
    if (t.contains(g)) continue;
    bool touches = false;
    for_each_neighbor(g, s.dim(), [&](const GridIndex& q) {
      if (!touches && t.contains(q)) touches = true;
    });
    if (touches) out.insert(g);
  }
  return out;
}

GridSet set_union(const GridSet& a, const GridSet& b) {
  require_compatible(a, b, "set_union");
  GridSet out = a;
  for (const auto& g : b) out.insert(g);
  return out;
}

GridSet set_intersection(const GridSet& a, const GridSet& b) {
  require_compatible(a, b, "set_intersection");
  const GridSet& small = a.size() <= b.size() ? a : b;
  const GridSet& large = a.size() <= b.size() ? b : a;
  GridSet out(a.dim(), a.spacing());
  for (const auto& g : small)
    if (large.contains(g)) out.insert(g);
  return out;
}

GridSet set_difference(const GridSet& a, const GridSet& b) {
  require_compatible(a, b, "set_difference");
  GridSet out(a.dim(), a.spacing());
  for (const auto& g : a)
    if (!b.contains(g)) out.insert(g);
  return out;
}

GridSet symmetric_difference(const GridSet& a, const GridSet& b) {
  require_compatible(a, b, "symmetric_difference");
  GridSet out(a.dim(), a.spacing());
  for (const auto& g : a)
    if (!b.contains(g)) out.insert(g);
  for (const auto& g : b)
    if (!a.contains(g)) out.insert(g);
  return out;
}

void write_cells_csv(std::ostream& os, const GridSet& s, const std::string& kind) {
  os << "# d=" << s.dim() << " rho=" << format_double(s.spacing()) << " kind=" << kind << "\n";
  for (const auto& g : s.sorted_cells()) {
    for (int i = 0; i < s.dim(); ++i) {
      if (i) os << ',';
      os << g[i];
    }
    os << "\n";
  }
}

GridSet read_cells_csv(std::istream& is, std::string* kind_out) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# d=", 0) != 0)
    throw GridError("cell CSV: missing header");
  int dim = 0;
  double rho = 0.0;
  std::string kind;
  {
    std::istringstream hs(header.substr(2));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("d=", 0) == 0) dim = std::stoi(tok.substr(2));
      else if (tok.rfind("rho=", 0) == 0) rho = std::stod(tok.substr(4));
      else if (tok.rfind("kind=", 0) == 0) kind = tok.substr(5);
    }
  }
  if (dim < 1 || !(rho > 0.0)) throw GridError("cell CSV: malformed header: " + header);
  if (kind_out) *kind_out = kind;

  GridSet out(dim, rho);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    GridIndex g;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < dim; ++i) {
      int v = 0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        throw GridError("cell CSV: malformed line: " + line);
      g[i] = v;
      p = res.ptr;
      if (i + 1 < dim) {
        if (p == end || *p != ',') throw GridError("cell CSV: malformed line: " + line);
        ++p;
      }
    }
    out.insert(g);
  }
  return out;
}

}  // namespace reach
