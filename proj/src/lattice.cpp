#include "chemdist/lattice.hpp"

#include <algorithm>
#include <sstream>

#include "chemdist/errors.hpp"

namespace chemdist {

Point::Point(std::initializer_list<Coord> coords) : dim_(static_cast<std::uint8_t>(coords.size())) {
  int i = 0;
  for (Coord c : coords) c_[i++] = c;
}

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  return os.str();
}

int EdgeId::axis() const {
  for (int i = 0; i < x_e.dim(); ++i)
    if (x_e[i] != y_e[i]) return i;
  return 0;
}

std::string EdgeId::str() const { return x_e.str() + "-" + y_e.str(); }

std::int64_t BoxSpec::vertex_count() const {
  std::int64_t v = 1;
  for (int i = 0; i < dim(); ++i) v *= 2 * static_cast<std::int64_t>(radius) + 1;
  return v;
}

Lattice::Lattice(const BoxSpec& box) : d_(box.dim()), box_(box), lo_(box.center) {
  if (d_ < 2 || d_ > kMaxDim) throw Error(ErrorKind::InvalidParams, "dimension must be in [2,4]");
  if (box.radius < 0) throw Error(ErrorKind::InvalidParams, "negative box radius");
  side_ = 2 * box.radius + 1;
  for (int i = 0; i < d_; ++i) lo_[i] = box.center[i] - box.radius;
  std::int64_t s = 1;
  for (int i = d_ - 1; i >= 0; --i) {
    stride_[i] = s;
    s *= side_;
  }
  vcount_ = s;
  ecount_ = static_cast<std::int64_t>(d_) * (vcount_ / side_) * (side_ - 1);
}

Lattice Lattice::centered(int dim, Coord radius) { return Lattice(BoxSpec{Point(dim), radius}); }

Point Lattice::vertex_at(std::int64_t idx) const {
  Point p(d_);
  for (int i = 0; i < d_; ++i) p[i] = lo_[i] + digit(idx, i);
  return p;
}

bool Lattice::has_edge_slot(std::int64_t slot) const {
  if (slot < 0 || slot >= slot_count()) return false;
  const int axis = static_cast<int>(slot % d_);
  return digit(slot / d_, axis) < side_ - 1;
}

EdgeId Lattice::canonical_edge(const Point& a, const Point& b) const {
  if (a.dim() != d_ || b.dim() != d_ || dist1(a, b) != 1)
    throw Error(ErrorKind::NonAdjacent, a.str() + " " + b.str());
  if (!contains(a) || !contains(b)) throw Error(ErrorKind::OutOfBox, a.str() + " " + b.str());
  EdgeId e;
  if (norm1(a) < norm1(b)) {
    e.x_e = a;
    e.y_e = b;
  } else {
    e.x_e = b;
    e.y_e = a;
  }
  e.index = edge_index(e.lo(), e.axis());
  return e;
}

// Number of edges whose lower endpoint precedes vertex vidx. A vertex owns one
// edge per axis except along axes where it sits on the upper face, so this is
// vidx*d minus, per axis j, the count of earlier vertices with digit j = side-1.
std::uint64_t Lattice::edges_before_vertex(std::int64_t vidx) const {
  const std::int64_t S = side_;
  std::int64_t missing = 0;
  for (int j = 0; j < d_; ++j) {
    const bool vj_top = digit(vidx, j) == S - 1;
    for (int k = 0; k < d_; ++k) {
      const std::int64_t vk = digit(vidx, k);
      if (k > j) {
        if (vj_top) missing += vk * stride_[k];
      } else if (k < j) {
        missing += vk * (stride_[k] / S);
      }
    }
  }
  return static_cast<std::uint64_t>(vidx * d_ - missing);
}

std::uint64_t Lattice::edge_index(const Point& lo, int axis) const {
  const std::int64_t v = vertex_index(lo);
  std::uint64_t idx = edges_before_vertex(v);
  for (int j = 0; j < axis; ++j)
    if (digit(v, j) < side_ - 1) ++idx;
  return idx;
}

EdgeId Lattice::edge_from_slot(std::int64_t slot) const {
  const std::int64_t v = slot / d_;
  const int axis = static_cast<int>(slot % d_);
  const Point a = vertex_at(v);
  return canonical_edge(a, a + Point::unit(d_, axis));
}

EdgeId Lattice::edge_at(std::uint64_t index) const {
  if (index >= static_cast<std::uint64_t>(ecount_)) throw Error(ErrorKind::OutOfBox, "edge index");
  std::int64_t lo = 0, hi = vcount_ - 1;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (edges_before_vertex(mid) <= index)
      lo = mid;
    else
      hi = mid - 1;
  }
  std::uint64_t k = index - edges_before_vertex(lo);
  for (int axis = 0; axis < d_; ++axis) {
    if (digit(lo, axis) == side_ - 1) continue;
    if (k == 0) {
      const Point a = vertex_at(lo);
      return canonical_edge(a, a + Point::unit(d_, axis));
    }
    --k;
  }
  throw Error(ErrorKind::OutOfBox, "edge index");
}

std::vector<EdgeId> Lattice::edges() const {
  std::vector<EdgeId> out;
  out.reserve(static_cast<std::size_t>(ecount_));
  for (std::int64_t v = 0; v < vcount_; ++v) {
    const Point a = vertex_at(v);
    for (int axis = 0; axis < d_; ++axis) {
      if (digit(v, axis) == side_ - 1) continue;
      out.push_back(canonical_edge(a, a + Point::unit(d_, axis)));
    }
  }
  return out;
}

std::vector<Point> Lattice::vertices() const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(vcount_));
  for (std::int64_t v = 0; v < vcount_; ++v) out.push_back(vertex_at(v));
  return out;
}

std::vector<EdgeId> enumerate_edges(const BoxSpec& box) {
  if (box.radius < 1) return {};
  return Lattice(box).edges();
}

std::vector<Point> box_points(const BoxSpec& box) { return Lattice(box).vertices(); }

std::vector<Point> shell_points(const Point& center, Coord t) {
  std::vector<Point> out;
  const int d = center.dim();
  Point p = center;
  for (int i = 0; i < d; ++i) p[i] = center[i] - t;
  while (true) {
    if (dist_inf(p, center) == t) out.push_back(p);
    int i = d - 1;
    // Inside the shell only the two extreme values of the last coordinate matter.
    if (p[i] == center[i] - t && t > 1) {
      bool prefix_on_shell = false;
      for (int k = 0; k + 1 < d; ++k) prefix_on_shell |= std::abs(p[k] - center[k]) == t;
      if (!prefix_on_shell) {
        p[i] = center[i] + t;
        continue;
      }
    }
    while (i >= 0 && p[i] == center[i] + t) {
      p[i] = center[i] - t;
      --i;
    }
    if (i < 0) break;
    ++p[i];
  }
  return out;
}

AnnulusMembers annulus_members(const Lattice& domain, const AnnulusSpec& a) {
  if (a.N < 1) throw Error(ErrorKind::InvalidParams, "annulus N must be positive");
  if (!domain.contains(a.outer())) throw Error(ErrorKind::OutOfBox, "annulus outer box leaves domain");
  AnnulusMembers m;
  m.spec = a;
  m.inner_shell = shell_points(a.edge.x_e, a.N);
  m.outer_shell = shell_points(a.edge.x_e, 3 * a.N);
  return m;
}

}  // namespace chemdist
