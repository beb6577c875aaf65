#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "chemdist/lattice.hpp"
#include "chemdist/path.hpp"
#include "chemdist/percolation.hpp"

namespace chemdist {

struct PassagePair {
  std::int64_t unit_edges = 0;
  std::int64_t heavy_edges = 0;

  double value(double W) const {
    return static_cast<double>(unit_edges) + static_cast<double>(heavy_edges) * W;
  }
  PassagePair operator+(const PassagePair& o) const {
    return {unit_edges + o.unit_edges, heavy_edges + o.heavy_edges};
  }
  bool operator==(const PassagePair&) const = default;
};

// Sign of a - b under weight W: by value, ties by fewer heavy edges.
inline int compare(const PassagePair& a, const PassagePair& b, double W) {
  const double diff = static_cast<double>(a.unit_edges - b.unit_edges) +
                      static_cast<double>(a.heavy_edges - b.heavy_edges) * W;
  if (diff < 0) return -1;
  if (diff > 0) return 1;
  if (a.heavy_edges != b.heavy_edges) return a.heavy_edges < b.heavy_edges ? -1 : 1;
  return 0;
}

// Vertex set U: a box, optionally minus an inner box, optionally filtered.
struct Region {
  BoxSpec box;
  std::optional<BoxSpec> hole;
  std::function<bool(const Point&)> filter;

  static Region of_box(const BoxSpec& b) { return Region{b, std::nullopt, {}}; }
  static Region of_annulus(const AnnulusSpec& a) { return Region{a.outer(), a.inner(), {}}; }
  static Region whole(const Lattice& lat) { return of_box(lat.box()); }

  bool contains(const Point& v) const {
    if (!box.contains(v)) return false;
    if (hole && hole->contains(v)) return false;
    return !filter || filter(v);
  }
};

struct SearchLimit {
  std::optional<Point> stop_at;  // stop once this vertex is settled
  std::int64_t max_dist = std::numeric_limits<std::int64_t>::max();
};

// Shared state of D and T fields: region, local grid, membership mask.
class FieldBase {
 public:
  const Region& region() const { return region_; }
  const std::vector<Point>& sources() const { return sources_; }
  // False when the search stopped early; unsettled vertices then report no
  // distance even if reachable.
  bool complete() const { return complete_; }
  const ConfigView& view() const { return view_; }

 protected:
  FieldBase(const ConfigView& view, Region region);
  bool in_region(const Point& v) const {
    return region_.box.contains(v) && mask_[static_cast<std::size_t>(grid_.vertex_index(v))];
  }
  std::int64_t local(const Point& v) const { return grid_.vertex_index(v); }

  ConfigView view_;
  Region region_;
  Lattice grid_;
  std::vector<std::uint8_t> mask_;
  std::vector<Point> sources_;
  bool complete_ = true;

  friend class SearchAccess;
};

class DistanceField : public FieldBase {
 public:
  // Unreachable (or unsettled, see complete()) yields nullopt.
  std::optional<std::int64_t> distance(const Point& v) const;
  bool reachable(const Point& v) const { return distance(v).has_value(); }
  // Lexicographically smallest neighbor u in U with D(u) = D(v) - 1 over an
  // open edge; nullopt at sources.
  std::optional<Point> predecessor(const Point& v) const;

 private:
  DistanceField(const ConfigView& view, Region region) : FieldBase(view, std::move(region)) {}
  std::vector<std::int32_t> dist_;
  friend DistanceField bfs_distance(const ConfigView&, const Region&, std::span<const Point>,
                                    const SearchLimit&);
};

class PassageField : public FieldBase {
 public:
  double W() const { return view_.W(); }
  std::optional<PassagePair> distance(const Point& v) const;
  bool reachable(const Point& v) const { return distance(v).has_value(); }
  std::optional<Point> predecessor(const Point& v) const;

 private:
  PassageField(const ConfigView& view, Region region) : FieldBase(view, std::move(region)) {}
  std::vector<std::int32_t> unit_;
  std::vector<std::int32_t> heavy_;
  std::vector<std::uint8_t> settled_;
  friend PassageField truncated_T(const ConfigView&, const Region&, const Point&, const SearchLimit&);
  friend PassageField truncated_T_multi(const ConfigView&, const Region&, std::span<const Point>,
                                        const SearchLimit&);
};

// Graph distance over open edges inside U. Throws EmptySources / OutOfBox.
DistanceField bfs_distance(const ConfigView& cfg, const Region& U, std::span<const Point> sources,
                           const SearchLimit& limit = {});
inline DistanceField bfs_distance(const ConfigView& cfg, const Region& U, const Point& source,
                                  const SearchLimit& limit = {}) {
  return bfs_distance(cfg, U, std::span<const Point>(&source, 1), limit);
}

// Exact passage times with weights 1 (open) and W (closed), two FIFO buckets.
PassageField truncated_T(const ConfigView& cfg, const Region& U, const Point& source,
                         const SearchLimit& limit = {});
PassageField truncated_T_multi(const ConfigView& cfg, const Region& U, std::span<const Point> sources,
                               const SearchLimit& limit = {});

// Throws UnreachableTarget.
PathRep extract_geodesic(const DistanceField& field, const Point& target);
PathRep extract_geodesic(const PassageField& field, const Point& target);

PassagePair path_cost(const ConfigView& cfg, const PathRep& path);
bool path_open(const ConfigView& cfg, const PathRep& path);
std::vector<EdgeId> closed_edges(const ConfigView& cfg, const PathRep& path);

struct ClusterLabels {
  Lattice lattice;
  std::vector<std::int32_t> root;  // representative per vertex
  std::vector<std::int32_t> size;  // indexed by representative
  std::int32_t largest = -1;
  std::int64_t largest_size = 0;

  std::int32_t id(const Point& v) const { return root[static_cast<std::size_t>(lattice.vertex_index(v))]; }
  bool connected(const Point& a, const Point& b) const { return id(a) == id(b); }
  bool in_largest(const Point& v) const { return id(v) == largest; }
  std::int64_t cluster_size(const Point& v) const { return size[static_cast<std::size_t>(id(v))]; }
  double largest_fraction() const {
    return static_cast<double>(largest_size) / static_cast<double>(lattice.vertex_count());
  }
};

// Largest cluster ties resolve to the one holding the smallest vertex.
ClusterLabels label_clusters(const ConfigView& cfg);

// l-infinity closest vertex of the largest cluster, lexicographic ties.
// Throws EmptyCluster when the largest cluster has no edge.
Point regularize(const ClusterLabels& labels, const Point& x);

struct Observables {
  Point origin_star;
  Point target_star;
  std::int64_t d_star = 0;
  PassagePair t_star;
  PassagePair t_n;
  std::int64_t proxy_size = 0;
  double proxy_fraction = 0.0;
  bool supercriticality_warning = false;
};

std::int64_t D_star(const ConfigView& cfg, const ClusterLabels& labels);
PassagePair T_star(const ConfigView& cfg, const ClusterLabels& labels);
PassagePair T_n(const ConfigView& cfg);
// D*_n, T* and T_n together; asserts T*.value() <= D*_n.
Observables measure(const ConfigView& cfg, const ClusterLabels& labels);

// One cluster of the box-restricted open graph touching both faces in every direction.
bool crossing_check(const ConfigView& cfg, const BoxSpec& box);

}  // namespace chemdist
