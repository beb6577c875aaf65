#include "chemdist/path.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "chemdist/errors.hpp"

namespace chemdist {

PathRep PathRep::subpath(std::size_t i, std::size_t j) const {
  if (i > j || j >= v_.size()) throw Error(ErrorKind::PreconditionViolated, "bad subpath range");
  return PathRep(std::vector<Point>(v_.begin() + static_cast<std::ptrdiff_t>(i),
                                    v_.begin() + static_cast<std::ptrdiff_t>(j) + 1));
}

PathRep PathRep::reversed() const { return PathRep(std::vector<Point>(v_.rbegin(), v_.rend())); }

PathRep PathRep::loop_erased() const {
  std::vector<Point> out;
  std::unordered_map<Point, std::size_t, PointHash> pos;
  out.reserve(v_.size());
  for (const Point& p : v_) {
    auto it = pos.find(p);
    if (it == pos.end()) {
      pos.emplace(p, out.size());
      out.push_back(p);
      continue;
    }
    const std::size_t keep = it->second + 1;
    for (std::size_t k = keep; k < out.size(); ++k) pos.erase(out[k]);
    out.resize(keep);
  }
  return PathRep(std::move(out));
}

bool PathRep::is_nearest_neighbor() const {
  for (std::size_t i = 1; i < v_.size(); ++i)
    if (dist1(v_[i - 1], v_[i]) != 1) return false;
  return true;
}

bool PathRep::is_self_avoiding() const {
  std::unordered_set<Point, PointHash> seen;
  for (const Point& p : v_)
    if (!seen.insert(p).second) return false;
  return true;
}

std::optional<std::size_t> PathRep::find(const Point& p) const {
  auto it = std::find(v_.begin(), v_.end(), p);
  if (it == v_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - v_.begin());
}

std::optional<std::size_t> PathRep::edge_position(const EdgeId& e) const {
  for (std::size_t i = 1; i < v_.size(); ++i) {
    if ((v_[i - 1] == e.x_e && v_[i] == e.y_e) || (v_[i - 1] == e.y_e && v_[i] == e.x_e))
      return i - 1;
  }
  return std::nullopt;
}

PathRep concat(const PathRep& a, const PathRep& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.back() != b.front())
    throw Error(ErrorKind::PreconditionViolated, "concatenation endpoints differ");
  std::vector<Point> v = a.vertices();
  v.insert(v.end(), b.vertices().begin() + 1, b.vertices().end());
  return PathRep(std::move(v));
}

}  // namespace chemdist
