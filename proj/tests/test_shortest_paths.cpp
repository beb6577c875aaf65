#include <doctest.h>

#include <cmath>

#include "chemdist/errors.hpp"
#include "chemdist/shortest_paths.hpp"
#include "oracles.hpp"

using namespace chemdist;

namespace {

Params small_params(std::uint64_t seed, double p = 0.6, int n = 4) {
  Params pr;
  pr.n = n;
  pr.p = p;
  pr.seed = seed;
  return pr;
}

EdgeConfig all_open(int n, int d = 2) {
  Params pr;
  pr.n = n;
  pr.d = d;
  if (d >= 3) pr.c_star_op = 100;
  return make_config(pr, [](const EdgeId&) { return true; });
}

}  // namespace

TEST_SUITE("shortest_paths") {
  TEST_CASE("all-open distances") {
    const EdgeConfig cfg = all_open(12);
    const Region all = Region::whole(cfg.lattice());
    const auto D = bfs_distance(cfg, all, Point(2));
    const auto T = truncated_T(cfg, all, Point(2));
    CHECK(*D.distance(Point{12, 0}) == 12);
    for (const Point& v : box_points(BoxSpec{Point(2), 6})) {
      CHECK(*D.distance(v) == norm1(v));
      CHECK(T.distance(v)->unit_edges == norm1(v));
      CHECK(T.distance(v)->heavy_edges == 0);
    }
    const PathRep g = extract_geodesic(T, Point{12, 0});
    CHECK(g.length() == 12);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == Point{static_cast<Coord>(i), 0});
    const ClusterLabels labels = label_clusters(cfg);
    const Observables o = measure(cfg, labels);
    CHECK(o.d_star == 12);
    CHECK(o.t_n.value(cfg.W()) == 12.0);
    CHECK(o.t_star == o.t_n);
  }

  TEST_CASE("isolated vertex is unreachable") {
    Params pr = small_params(1);
    EdgeConfig cfg = make_config(pr, [](const EdgeId& e) { return !(e.x_e == Point{0, 0} || e.y_e == Point{0, 0}); });
    const auto D = bfs_distance(cfg, Region::whole(cfg.lattice()), Point{1, 0});
    CHECK_FALSE(D.reachable(Point{0, 0}));
    CHECK_FALSE(D.distance(Point{0, 0}).has_value());
    CHECK_THROWS_AS(extract_geodesic(D, Point{0, 0}), Error);
    const auto T = truncated_T(cfg, Region::whole(cfg.lattice()), Point{1, 0});
    CHECK(T.distance(Point{0, 0})->heavy_edges == 1);
    CHECK_THROWS_AS(bfs_distance(cfg, Region::whole(cfg.lattice()), std::span<const Point>{}), Error);
  }

  TEST_CASE("distances match exhaustive path search on 4x4 boxes") {
    const BoxSpec box4{Point{0, 0}, 2};
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const EdgeConfig cfg = sample_config(small_params(seed, 0.55));
      // 4x4 vertex set: lower-left quadrant of the 5x5 box.
      Region U = Region::of_box(box4);
      U.filter = [](const Point& v) { return v[0] < 2 && v[1] < 2; };
      std::vector<Point> verts;
      for (const Point& v : box_points(box4))
        if (U.contains(v)) verts.push_back(v);
      REQUIRE(verts.size() == 16);
      const Point src = verts[seed % verts.size()];
      const auto brute = oracle::all_paths(cfg, verts, src);
      const auto D = bfs_distance(cfg, U, src);
      const auto T = truncated_T(cfg, U, src);
      for (const Point& v : verts) {
        auto it = brute.D.find(v);
        if (it == brute.D.end())
          CHECK_FALSE(D.reachable(v));
        else
          CHECK(D.distance(v) == it->second);
        CHECK(*T.distance(v) == brute.T.at(v));
      }
    }
  }

  TEST_CASE("passage time bounded by heavy monotone path") {
    const EdgeConfig cfg = sample_config(small_params(3, 0.5, 10));
    const auto T = truncated_T(cfg, Region::whole(cfg.lattice()), Point(2));
    for (const Point& v : box_points(BoxSpec{Point(2), 10}))
      CHECK(T.distance(v)->value(cfg.W()) <= cfg.W() * norm1(v) + 1e-9);
  }

  TEST_CASE("geodesic cost equals field distance") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const EdgeConfig cfg = sample_config(small_params(seed, 0.65, 16));
      const Region all = Region::whole(cfg.lattice());
      const auto T = truncated_T(cfg, all, Point(2));
      const auto D = bfs_distance(cfg, all, Point(2));
      Stream rng(seed);
      for (int k = 0; k < 100; ++k) {
        const Point v{static_cast<Coord>(rng.below(41)) - 20, static_cast<Coord>(rng.below(41)) - 20};
        const PathRep g = extract_geodesic(T, v);
        CHECK(g.front() == Point(2));
        CHECK(g.back() == v);
        CHECK(g.is_nearest_neighbor());
        CHECK(g.is_self_avoiding());
        CHECK(path_cost(cfg, g) == *T.distance(v));
        CHECK(extract_geodesic(T, v) == g);
        if (D.reachable(v)) {
          const PathRep h = extract_geodesic(D, v);
          CHECK(path_open(cfg, h));
          CHECK(static_cast<std::int64_t>(h.length()) == *D.distance(v));
        }
        ++checked;
      }
    }
    CHECK(checked == 1000);
  }

  TEST_CASE("metric properties and T <= D") {
    const EdgeConfig cfg = sample_config(small_params(21, 0.7, 12));
    const Region all = Region::whole(cfg.lattice());
    const ClusterLabels labels = label_clusters(cfg);
    Stream rng(4);
    auto pick = [&] {
      while (true) {
        Point v{static_cast<Coord>(rng.below(25)) - 12, static_cast<Coord>(rng.below(25)) - 12};
        if (labels.in_largest(v)) return v;
      }
    };
    for (int k = 0; k < 40; ++k) {
      const Point x = pick(), y = pick(), z = pick();
      const auto Dx = bfs_distance(cfg, all, x), Dy = bfs_distance(cfg, all, y);
      const auto Tx = truncated_T(cfg, all, x);
      CHECK(Dx.distance(y) == Dy.distance(x));
      CHECK(*Dx.distance(z) <= *Dx.distance(y) + *Dy.distance(z));
      CHECK(*Dx.distance(y) >= dist1(x, y));
      CHECK(Tx.distance(y)->value(cfg.W()) <= static_cast<double>(*Dx.distance(y)));
    }
  }

  TEST_CASE("opening an edge never increases distances") {
    const EdgeConfig cfg = sample_config(small_params(8, 0.6, 8));
    const Region all = Region::whole(cfg.lattice());
    const auto edges = cfg.lattice().edges();
    const Point src{1, -1};
    const auto D0 = bfs_distance(cfg, all, src);
    const auto T0 = truncated_T(cfg, all, src);
    for (std::size_t k = 0; k < edges.size(); k += 37) {
      const ConfigView opened = resample_edge(cfg, edges[k], Weight::Unit);
      const auto D1 = bfs_distance(opened, all, src);
      const auto T1 = truncated_T(opened, all, src);
      for (const Point& v : cfg.lattice().vertices()) {
        if (D0.reachable(v)) CHECK(*D1.distance(v) <= *D0.distance(v));
        CHECK(compare(*T1.distance(v), *T0.distance(v), cfg.W()) <= 0);
      }
    }
  }

  TEST_CASE("single-edge gradient of T_n") {
    Params pr = small_params(17, 0.7, 24);
    const EdgeConfig cfg = sample_config(pr);
    const Region all = Region::whole(cfg.lattice());
    const Point target = Point::unit(2, 0, pr.n);
    const auto edges = cfg.lattice().edges();
    Stream rng(5);
    for (int k = 0; k < 100; ++k) {
      const EdgeId& e = edges[rng.below(edges.size())];
      const ConfigView heavy = resample_edge(cfg, e, Weight::Heavy);
      const ConfigView unit = resample_edge(cfg, e, Weight::Unit);
      const double grad = T_n(heavy).value(cfg.W()) - T_n(unit).value(cfg.W());
      CHECK(grad >= 0.0);
      CHECK(grad <= cfg.W() + 1e-9);
      const auto field = truncated_T(unit, all, Point(2), SearchLimit{target});
      if (!extract_geodesic(field, target).edge_position(e)) CHECK(grad == 0.0);
    }
  }

  TEST_CASE("passage pair precision") {
    const double W = std::log(512.0) * std::log(512.0);
    const PassagePair big{6'000'000, 4'000'000};
    const double exact = 6e6 + 4e6 * W;
    CHECK(std::abs(big.value(W) - exact) / exact < 1e-9);
    CHECK(compare(PassagePair{2, 0}, PassagePair{0, 1}, W) < 0);
    CHECK(compare(PassagePair{0, 1}, PassagePair{0, 1}, W) == 0);
  }

  TEST_CASE("regularize") {
    const EdgeConfig cfg = sample_config(small_params(2, 0.7, 32));
    const ClusterLabels labels = label_clusters(cfg);
    Stream rng(9);
    for (int k = 0; k < 1000; ++k) {
      const Point x{static_cast<Coord>(rng.below(101)) - 50, static_cast<Coord>(rng.below(101)) - 50};
      const Point xs = regularize(labels, x);
      CHECK(labels.in_largest(xs));
      CHECK(regularize(labels, xs) == xs);
      if (labels.in_largest(x)) CHECK(xs == x);
      // No closer proxy vertex exists.
      const Coord r = dist_inf(x, xs);
      for (const Point& v : box_points(BoxSpec{x, r}))
        if (cfg.lattice().contains(v) && labels.in_largest(v)) {
          CHECK(dist_inf(v, x) == r);
          CHECK_FALSE(v < xs);
        }
    }
    Params pr = small_params(1);
    const EdgeConfig closed = make_config(pr, [](const EdgeId&) { return false; });
    CHECK_THROWS_AS(regularize(label_clusters(closed), Point(2)), Error);
  }

  TEST_CASE("regularization distance decays geometrically") {
    // Survival of |x - x*| over t in [1,6] from uniform query points.
    std::vector<double> survive(8, 0.0);
    int total = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const EdgeConfig cfg = sample_config(small_params(seed, 0.7, 256));
      const ClusterLabels labels = label_clusters(cfg);
      Stream rng(seed, 77);
      for (int k = 0; k < 25000; ++k) {
        const Point x{static_cast<Coord>(rng.below(801)) - 400, static_cast<Coord>(rng.below(801)) - 400};
        const Coord r = dist_inf(x, regularize(labels, x));
        for (Coord t = 0; t < 8; ++t) survive[static_cast<std::size_t>(t)] += r >= t;
        ++total;
      }
    }
    for (double& s : survive) s /= total;
    MESSAGE("survival t=1..6: " << survive[1] << " " << survive[2] << " " << survive[3] << " " << survive[4]
                               << " " << survive[5] << " " << survive[6]);
    // Each further step multiplies the tail by at most the first-step ratio.
    const double q = survive[2] / survive[1];
    CHECK(q < 1.0);
    for (int t = 2; t < 6; ++t)
      if (survive[t] > 0) CHECK(survive[t + 1] <= survive[t] * std::max(q, 0.5) + 1e-12);
  }

  TEST_CASE("regression triple at seed 7") {
    Params pr;
    pr.n = 64;
    pr.p = 0.7;
    pr.seed = 7;
    const EdgeConfig cfg = sample_config(pr);
    const Observables o = measure(cfg, label_clusters(cfg));
    MESSAGE("D* = " << o.d_star << ", T* = (" << o.t_star.unit_edges << "," << o.t_star.heavy_edges
                    << "), T_n = (" << o.t_n.unit_edges << "," << o.t_n.heavy_edges << ")");
    CHECK(o.d_star >= pr.n);
    CHECK(o.t_star.value(cfg.W()) <= static_cast<double>(o.d_star));
    CHECK(o.d_star == 84);
    CHECK(o.t_star == PassagePair{84, 0});
    CHECK(o.t_n == PassagePair{84, 0});
  }

  TEST_CASE("crossing check") {
    const EdgeConfig open = all_open(8);
    const EdgeConfig closed = make_config(open.params(), [](const EdgeId&) { return false; });
    CHECK(crossing_check(open, BoxSpec{Point(2), 4}));
    CHECK_FALSE(crossing_check(closed, BoxSpec{Point(2), 4}));
    // At p = 0.7 the frequencies saturate near 1 and are only non-decreasing;
    // closer to criticality they increase strictly.
    for (double p : {0.7, 0.55}) {
      std::vector<double> freq;
      for (Coord t : {4, 8, 16}) {
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
          const EdgeConfig cfg = sample_config(small_params(seed, p, 16));
          hits += crossing_check(cfg, BoxSpec{Point(2), t});
        }
        freq.push_back(hits / 200.0);
      }
      MESSAGE("p=" << p << " crossing frequencies: " << freq[0] << " " << freq[1] << " " << freq[2]);
      CHECK(freq[0] <= freq[1]);
      CHECK(freq[1] <= freq[2]);
      if (p < 0.6) {
        CHECK(freq[0] < freq[1]);
        CHECK(freq[1] < freq[2]);
      }
    }
  }
}
