#include <doctest.h>

#include <set>

#include "chemdist/errors.hpp"
#include "chemdist/lattice.hpp"

using namespace chemdist;

namespace {

// Nearest-neighbor pairs of a box by brute force over all vertex pairs.
std::size_t brute_edge_count(const BoxSpec& box) {
  const auto pts = box_points(box);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (dist1(pts[i], pts[j]) == 1) ++count;
  return count;
}

}  // namespace

TEST_SUITE("lattice_core") {
  TEST_CASE("canonical orientation") {
    const Lattice lat = Lattice::centered(2, 4);
    auto e = lat.canonical_edge({0, 0}, {1, 0});
    CHECK(e.x_e == Point{0, 0});
    CHECK(e.y_e == Point{1, 0});
    e = lat.canonical_edge({-1, 0}, {0, 0});
    CHECK(e.x_e == Point{0, 0});
    CHECK(e.y_e == Point{-1, 0});
    e = lat.canonical_edge({2, 1}, {2, 2});
    CHECK(e.x_e == Point{2, 1});
    CHECK(e.y_e == Point{2, 2});
  }

  TEST_CASE("canonical_edge errors") {
    const Lattice lat = Lattice::centered(2, 2);
    CHECK_THROWS_AS(lat.canonical_edge({0, 0}, {1, 1}), Error);
    CHECK_THROWS_AS(lat.canonical_edge({0, 0}, {0, 0}), Error);
    try {
      lat.canonical_edge({2, 0}, {3, 0});
      FAIL("expected OutOfBox");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::OutOfBox);
    }
    try {
      lat.canonical_edge({0, 0}, {2, 0});
      FAIL("expected NonAdjacent");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::NonAdjacent);
    }
  }

  TEST_CASE("edge counts against brute force") {
    CHECK(enumerate_edges(BoxSpec{Point(2), 1}).size() == 12);
    CHECK(enumerate_edges(BoxSpec{Point(2), 0}).empty());
    CHECK(enumerate_edges(BoxSpec{Point(3), 1}).size() == 54);
    for (int d = 2; d <= 3; ++d)
      for (Coord r = 1; r <= 3; ++r) {
        const BoxSpec box{Point(d), r};
        CHECK(enumerate_edges(box).size() == brute_edge_count(box));
        CHECK(static_cast<std::size_t>(Lattice(box).edge_count()) == brute_edge_count(box));
      }
    // Off-center box.
    const BoxSpec shifted{Point{3, -2}, 2};
    CHECK(enumerate_edges(shifted).size() == brute_edge_count(shifted));
  }

  TEST_CASE("enumeration is a lexicographic bijection") {
    for (int d = 2; d <= 3; ++d) {
      const Lattice lat = Lattice::centered(d, 2);
      const auto edges = lat.edges();
      std::set<std::pair<Point, int>> seen;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        CHECK(edges[i].index == i);
        CHECK(lat.edge_at(i) == edges[i]);
        CHECK(lat.edge_at(i).index == i);
        CHECK(lat.edge_index(edges[i].lo(), edges[i].axis()) == i);
        CHECK(lat.edge_from_slot(lat.slot(edges[i])) == edges[i]);
        CHECK(seen.insert({edges[i].lo(), edges[i].axis()}).second);
        if (i > 0) {
          const auto prev = std::make_pair(edges[i - 1].lo(), edges[i - 1].axis());
          CHECK(prev < std::make_pair(edges[i].lo(), edges[i].axis()));
        }
      }
    }
  }

  TEST_CASE("norm gap and idempotent canonicalization") {
    for (int d = 2; d <= 3; ++d) {
      const Lattice lat = Lattice::centered(d, 3);
      for (const Point& a : lat.vertices()) {
        for (int i = 0; i < d; ++i) {
          const Point b = a + Point::unit(d, i);
          if (!lat.contains(b)) continue;
          CHECK(std::abs(norm1(a) - norm1(b)) == 1);
          const EdgeId e1 = lat.canonical_edge(a, b);
          const EdgeId e2 = lat.canonical_edge(b, a);
          CHECK(e1 == e2);
          CHECK(e1.index == e2.index);
          CHECK(norm1(e1.x_e) < norm1(e1.y_e));
        }
      }
    }
  }

  TEST_CASE("box and annulus membership against brute force") {
    const Lattice lat = Lattice::centered(2, 6);
    const EdgeId e = lat.canonical_edge({0, 0}, {1, 0});
    const AnnulusSpec a{e, 1};
    const auto members = annulus_members(lat, a);
    std::size_t count = 0;
    for (const Point& v : lat.vertices()) {
      const Coord r = std::max(std::abs(v[0]), std::abs(v[1]));
      CHECK(BoxSpec{Point(2), 3}.contains(v) == (r <= 3));
      CHECK(members.contains(v) == (r > 1 && r <= 3));
      count += members.contains(v);
    }
    CHECK(count == 40);
    CHECK_FALSE(a.contains({1, 1}));
    CHECK(a.contains({3, -3}));
    CHECK(members.inner_shell.size() == 8);
    CHECK(members.outer_shell.size() == 24);
    CHECK_THROWS_AS(annulus_members(lat, AnnulusSpec{e, 3}), Error);
  }

  TEST_CASE("shell points are sorted and exact") {
    for (int d = 2; d <= 3; ++d)
      for (Coord t = 0; t <= 4; ++t) {
        const Point c = d == 2 ? Point{1, -2} : Point{0, 1, 2};
        const auto shell = shell_points(c, t);
        std::vector<Point> brute;
        for (const Point& v : box_points(BoxSpec{c, t}))
          if (dist_inf(v, c) == t) brute.push_back(v);
        CHECK(shell == brute);
      }
  }
}
