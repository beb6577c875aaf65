#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <string>
#include <vector>

namespace chemdist {

inline constexpr int kMaxDim = 4;
using Coord = std::int32_t;

class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(static_cast<std::uint8_t>(dim)) {}
  Point(std::initializer_list<Coord> coords);

  static Point unit(int dim, int axis, Coord length = 1) {
    Point p(dim);
    p.c_[axis] = length;
    return p;
  }

  int dim() const { return dim_; }
  Coord operator[](int i) const { return c_[i]; }
  Coord& operator[](int i) { return c_[i]; }

  Point operator+(const Point& o) const {
    Point r(*this);
    for (int i = 0; i < dim_; ++i) r.c_[i] += o.c_[i];
    return r;
  }
  Point operator-(const Point& o) const {
    Point r(*this);
    for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
    return r;
  }

  // Unused trailing coordinates are zero, so the array comparison is
  // lexicographic over the first dim() coordinates.
  auto operator<=>(const Point&) const = default;
  bool operator==(const Point&) const = default;

  std::string str() const;

 private:
  std::array<Coord, kMaxDim> c_{};
  std::uint8_t dim_ = 0;
};

inline Coord norm1(const Point& p) {
  Coord s = 0;
  for (int i = 0; i < p.dim(); ++i) s += std::abs(p[i]);
  return s;
}

inline Coord norm_inf(const Point& p) {
  Coord s = 0;
  for (int i = 0; i < p.dim(); ++i) s = std::max(s, std::abs(p[i]));
  return s;
}

inline Coord dist1(const Point& a, const Point& b) { return norm1(a - b); }
inline Coord dist_inf(const Point& a, const Point& b) { return norm_inf(a - b); }

struct EdgeId {
  Point x_e;
  Point y_e;
  std::uint64_t index = 0;

  // Axis along which the two endpoints differ.
  int axis() const;
  // Endpoint with the smaller coordinate along axis().
  const Point& lo() const { return x_e < y_e ? x_e : y_e; }
  const Point& hi() const { return x_e < y_e ? y_e : x_e; }
  bool operator==(const EdgeId& o) const { return x_e == o.x_e && y_e == o.y_e; }
  std::string str() const;
};

// Edge-to-edge distance used by the separation checks: the l-infinity distance
// between anchor points x_e.
inline Coord edge_dist_inf(const EdgeId& a, const EdgeId& b) { return dist_inf(a.x_e, b.x_e); }

struct BoxSpec {
  Point center;
  Coord radius = 0;

  bool contains(const Point& v) const { return dist_inf(v, center) <= radius; }
  bool contains(const BoxSpec& inner) const {
    return dist_inf(inner.center, center) + inner.radius <= radius;
  }
  int dim() const { return center.dim(); }
  std::int64_t vertex_count() const;
};

struct AnnulusSpec {
  EdgeId edge;
  Coord N = 1;

  BoxSpec inner() const { return {edge.x_e, N}; }
  BoxSpec outer() const { return {edge.x_e, 3 * N}; }
  bool contains(const Point& v) const {
    const Coord r = dist_inf(v, edge.x_e);
    return r > N && r <= 3 * N;
  }
};

// Indexing of the vertices and edges of one box. Vertices are ranked
// lexicographically (first coordinate most significant). Edges are ranked by
// (lower endpoint, axis); storage uses the sparse slot vertex*d + axis.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(const BoxSpec& box);
  static Lattice centered(int dim, Coord radius);

  int dim() const { return d_; }
  const BoxSpec& box() const { return box_; }
  Coord radius() const { return box_.radius; }
  Coord side() const { return side_; }
  std::int64_t vertex_count() const { return vcount_; }
  std::int64_t edge_count() const { return ecount_; }
  std::int64_t slot_count() const { return vcount_ * d_; }
  std::int64_t stride(int axis) const { return stride_[axis]; }

  bool contains(const Point& v) const { return box_.contains(v); }
  bool contains(const BoxSpec& b) const { return box_.contains(b); }

  std::int64_t vertex_index(const Point& v) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d_; ++i) idx += static_cast<std::int64_t>(v[i] - lo_[i]) * stride_[i];
    return idx;
  }
  Point vertex_at(std::int64_t idx) const;
  Coord digit(std::int64_t idx, int axis) const {
    return static_cast<Coord>((idx / stride_[axis]) % side_);
  }

  std::int64_t slot(const Point& lo, int axis) const { return vertex_index(lo) * d_ + axis; }
  std::int64_t slot(const EdgeId& e) const { return slot(e.lo(), e.axis()); }

  // Throws NonAdjacent / OutOfBox.
  EdgeId canonical_edge(const Point& a, const Point& b) const;
  EdgeId edge_from_slot(std::int64_t slot) const;
  EdgeId edge_at(std::uint64_t index) const;
  std::uint64_t edge_index(const Point& lo, int axis) const;
  bool has_edge_slot(std::int64_t slot) const;

  std::vector<EdgeId> edges() const;
  std::vector<Point> vertices() const;

 private:
  std::uint64_t edges_before_vertex(std::int64_t vidx) const;

  int d_ = 0;
  BoxSpec box_;
  Point lo_;
  Coord side_ = 0;
  std::array<std::int64_t, kMaxDim> stride_{};
  std::int64_t vcount_ = 0;
  std::int64_t ecount_ = 0;
};

std::vector<EdgeId> enumerate_edges(const BoxSpec& box);

// Points of box, lexicographic.
std::vector<Point> box_points(const BoxSpec& box);
// Points v with |v - center|_inf == t, lexicographic.
std::vector<Point> shell_points(const Point& center, Coord t);

struct AnnulusMembers {
  AnnulusSpec spec;
  std::vector<Point> inner_shell;  // boundary of Lambda_N(e)
  std::vector<Point> outer_shell;  // boundary of Lambda_3N(e)
  bool contains(const Point& v) const { return spec.contains(v); }
};

// Throws OutOfBox when Lambda_3N(e) leaves the domain.
AnnulusMembers annulus_members(const Lattice& domain, const AnnulusSpec& a);

}  // namespace chemdist
