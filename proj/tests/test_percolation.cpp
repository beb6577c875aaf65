#include <doctest.h>

#include <cmath>

#include "chemdist/errors.hpp"
#include "chemdist/percolation.hpp"

using namespace chemdist;

TEST_SUITE("percolation") {
  TEST_CASE("near-certain open probability opens everything") {
    Params pr;
    pr.n = 40;
    pr.p = 1.0 - 1e-12;
    const EdgeConfig cfg = sample_config(pr);
    REQUIRE(cfg.lattice().edge_count() >= 10000);
    CHECK(cfg.open_count() == cfg.lattice().edge_count());
  }

  TEST_CASE("seed 42 regression count") {
    Params pr;
    pr.n = 8;
    pr.seed = 42;
    const EdgeConfig cfg = sample_config(pr);
    const double m = static_cast<double>(cfg.lattice().edge_count());
    const double count = static_cast<double>(cfg.open_count());
    CHECK(std::abs(count - pr.p * m) < 5.0 * std::sqrt(m * pr.p * (1 - pr.p)));
    CHECK(cfg.open_count() == 1447);
  }

  TEST_CASE("sampling is deterministic") {
    Params pr;
    pr.n = 20;
    pr.seed = 99;
    CHECK(sample_config(pr).bits() == sample_config(pr).bits());
    Params other = pr;
    other.seed = 100;
    CHECK(sample_config(pr).bits() != sample_config(other).bits());
  }

  TEST_CASE("configurations agree on shared edges across box factors") {
    Params small;
    small.n = 16;
    small.seed = 5;
    Params big = small;
    big.B = 3;
    const EdgeConfig a = sample_config(small), b = sample_config(big);
    for (const EdgeId& e : a.lattice().edges()) CHECK(a.open(e) == b.open(e));
  }

  TEST_CASE("empirical density") {
    Params pr;
    pr.n = 120;
    pr.p = 0.37;
    pr.seed = 3;
    const EdgeConfig cfg = sample_config(pr);
    const double m = static_cast<double>(cfg.lattice().edge_count());
    REQUIRE(m >= 1e5);
    const double dev = std::abs(cfg.open_count() - pr.p * m);
    CHECK(dev < 4.0 * std::sqrt(m * pr.p * (1 - pr.p)));
  }

  TEST_CASE("invalid params") {
    Params pr;
    pr.p = 1.0;
    CHECK_THROWS_AS(sample_config(pr), Error);
    pr.p = 0.5;
    pr.n = 2;
    CHECK_THROWS_AS(sample_config(pr), Error);
    pr.n = 10;
    pr.d = 3;
    CHECK_THROWS_AS(sample_config(pr), Error);  // c_star_op required in d=3
    pr.c_star_op = 100;
    CHECK_NOTHROW(sample_config(pr));
  }

  TEST_CASE("resample views") {
    Params pr;
    pr.n = 10;
    pr.seed = 11;
    const EdgeConfig cfg = sample_config(pr);
    const auto edges = cfg.lattice().edges();
    for (std::size_t k = 0; k < edges.size(); k += 7) {
      const EdgeId& e = edges[k];
      const ConfigView same = resample_edge(cfg, e, cfg.open(e) ? Weight::Unit : Weight::Heavy);
      const ConfigView heavy = resample_edge(cfg, e, Weight::Heavy);
      for (const EdgeId& f : edges) {
        CHECK(same.open(f) == cfg.open(f));
        if (f == e)
          CHECK(heavy.weight(f) == cfg.W());
        else
          CHECK(heavy.weight(f) == cfg.weight(f));
      }
    }
  }

  TEST_CASE("params text block") {
    Params pr;
    apply_param(pr, "n", "128");
    apply_param(pr, "p", "0.6");
    apply_param(pr, "box_factor", "3");
    CHECK(pr.n == 128);
    CHECK(pr.p == 0.6);
    CHECK(pr.B == 3);
    CHECK_THROWS_AS(apply_param(pr, "bogus", "1"), Error);
    CHECK_THROWS_AS(apply_param(pr, "n", "12x"), Error);
    CHECK(pr.to_kv().find("W=") != std::string::npos);
    CHECK(std::abs(pr.W() - std::log(128.0) * std::log(128.0)) < 1e-12);
  }
}
