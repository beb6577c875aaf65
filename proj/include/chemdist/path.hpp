#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "chemdist/lattice.hpp"

namespace chemdist {

struct PointHash {
  std::size_t operator()(const Point& p) const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < p.dim(); ++i)
      h = (h ^ static_cast<std::size_t>(static_cast<std::uint32_t>(p[i]))) * 0x100000001b3ULL;
    return h;
  }
};

// Vertex sequence. Concatenation may create repeats; loop_erased() restores
// self-avoidance.
class PathRep {
 public:
  PathRep() = default;
  explicit PathRep(std::vector<Point> vertices) : v_(std::move(vertices)) {}

  const std::vector<Point>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  // Number of edges.
  std::size_t length() const { return v_.empty() ? 0 : v_.size() - 1; }
  const Point& operator[](std::size_t i) const { return v_[i]; }
  const Point& front() const { return v_.front(); }
  const Point& back() const { return v_.back(); }

  // Vertices i..j inclusive (i <= j).
  PathRep subpath(std::size_t i, std::size_t j) const;
  PathRep reversed() const;
  // Chronological loop erasure keeping the earliest visit of every vertex.
  PathRep loop_erased() const;

  bool is_nearest_neighbor() const;
  bool is_self_avoiding() const;
  std::optional<std::size_t> find(const Point& p) const;
  // Position i with {v_i, v_{i+1}} equal to the edge.
  std::optional<std::size_t> edge_position(const EdgeId& e) const;

  bool operator==(const PathRep&) const = default;

 private:
  std::vector<Point> v_;
};

// Throws PreconditionViolated when a.back() != b.front().
PathRep concat(const PathRep& a, const PathRep& b);

}  // namespace chemdist
