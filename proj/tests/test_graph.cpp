#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mtd/errors.hpp"
#include "mtd/graph.hpp"
#include "oracles.hpp"

using mtd::AttackDefenseStructure;

TEST_CASE("from_pairs builds an undirected structure with symmetric incidence") {
  auto g = AttackDefenseStructure::from_pairs(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  CHECK(g.node_count() == 4);
  CHECK_FALSE(g.directed());
  CHECK(g.ordered_edge_count() == 6);  // each undirected edge counted both ways
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.attackers_of(1) == std::vector<int>{0, 2});
  CHECK(g.in_degree(1) == 2);
  CHECK(g.out_degree(1) == 2);
  CHECK(g.max_in_degree() == 2);
}

TEST_CASE("from_pairs keeps direction when asked") {
  auto g = AttackDefenseStructure::from_pairs(3, {{0, 1}, {1, 2}}, true);
  CHECK(g.directed());
  CHECK(g.ordered_edge_count() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
  CHECK(g.attackers_of(2) == std::vector<int>{1});
  CHECK(g.attackers_of(0).empty());
  CHECK(g.out_degree(0) == 1);
  CHECK(g.in_degree(0) == 0);
}

TEST_CASE("duplicate edges collapse, self-loops are rejected") {
  auto g = AttackDefenseStructure::from_pairs(3, {{0, 1}, {0, 1}, {1, 0}}, false);
  CHECK(g.ordered_edge_count() == 2);
  CHECK(g.attackers_of(1) == std::vector<int>{0});

  CHECK_THROWS_AS(AttackDefenseStructure::from_pairs(3, {{1, 1}}, false),
                  mtd::ValidationError);
  CHECK_THROWS_AS(AttackDefenseStructure::from_pairs(2, {{0, 5}}, false),
                  mtd::ValidationError);
  CHECK_THROWS_AS(AttackDefenseStructure::from_pairs(2, {{-1, 0}}, false),
                  mtd::ValidationError);
  CHECK_THROWS_AS(AttackDefenseStructure::from_pairs(0, {}, false),
                  mtd::ValidationError);
}

TEST_CASE("generators produce the advertised shapes") {
  SUBCASE("complete") {
    auto g = mtd::generate_complete(5);
    CHECK(g.node_count() == 5);
    CHECK(g.ordered_edge_count() == 20);
    for (int u = 0; u < 5; ++u)
      for (int v = 0; v < 5; ++v) CHECK(g.has_edge(u, v) == (u != v));
  }
  SUBCASE("star: node 0 is the hub") {
    auto g = mtd::generate_star(6);
    CHECK(g.node_count() == 7);
    CHECK(g.ordered_edge_count() == 12);
    CHECK(g.in_degree(0) == 6);
    for (int leaf = 1; leaf < 7; ++leaf) {
      CHECK(g.attackers_of(leaf) == std::vector<int>{0});
    }
    CHECK_FALSE(g.has_edge(1, 2));
  }
  SUBCASE("path") {
    auto g = mtd::generate_path(4);
    CHECK(g.ordered_edge_count() == 6);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(2, 3));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK_FALSE(g.has_edge(0, 3));
  }
  SUBCASE("erdos_renyi is reproducible per seed and respects p=0 / p=1") {
    auto a = mtd::generate_erdos_renyi(12, 0.4, 99);
    auto b = mtd::generate_erdos_renyi(12, 0.4, 99);
    CHECK(a.ordered_edge_count() == b.ordered_edge_count());
    for (int u = 0; u < 12; ++u)
      for (int v = 0; v < 12; ++v) CHECK(a.has_edge(u, v) == b.has_edge(u, v));

    auto c = mtd::generate_erdos_renyi(12, 0.4, 100);
    bool any_diff = c.ordered_edge_count() != a.ordered_edge_count();
    for (int u = 0; u < 12 && !any_diff; ++u)
      for (int v = 0; v < 12 && !any_diff; ++v)
        any_diff = c.has_edge(u, v) != a.has_edge(u, v);
    CHECK(any_diff);

    CHECK(mtd::generate_erdos_renyi(8, 0.0, 1).ordered_edge_count() == 0);
    CHECK(mtd::generate_erdos_renyi(8, 1.0, 1).ordered_edge_count() == 56);
  }
}

TEST_CASE("spectral radius matches closed forms on the named families") {
  // K_n has lambda1 = n-1, a star with L leaves sqrt(L), a path on n nodes
  // 2*cos(pi/(n+1)).
  CHECK(mtd::generate_complete(20).spectral_radius() == doctest::Approx(19.0).epsilon(1e-9));
  CHECK(mtd::generate_complete(7).spectral_radius() == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(mtd::generate_star(9).spectral_radius() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(mtd::generate_star(16).spectral_radius() == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(mtd::generate_path(5).spectral_radius() ==
        doctest::Approx(2.0 * std::cos(M_PI / 6.0)).epsilon(1e-9));
  CHECK(mtd::generate_path(2).spectral_radius() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral radius agrees with an independent Jacobi eigensolver") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 20);
    const double p = 0.2 + 0.6 * (rng() % 1000) / 1000.0;
    auto g = mtd::generate_erdos_renyi(n, p, rng());
    std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (g.has_edge(u, v)) adj[u][v] = 1.0;
    const double expected = test_oracle::jacobi_largest_eigenvalue(adj);
    CHECK(g.spectral_radius(1e-12) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("spectral radius of an empty-edge structure is zero") {
  auto g = AttackDefenseStructure::from_pairs(5, {}, false);
  CHECK(g.spectral_radius() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spectral radius is cached after the first computation") {
  auto g = mtd::generate_complete(6);
  CHECK_FALSE(g.cached_lambda1().has_value());
  const double l = g.spectral_radius();
  REQUIRE(g.cached_lambda1().has_value());
  CHECK(*g.cached_lambda1() == l);
  CHECK(g.spectral_radius() == l);
}

TEST_CASE("edge list parser handles comments, blank lines and the n= header") {
  const std::string text =
      "# attack graph for the demo\n"
      "n=5\n"
      "\n"
      "1 2\n"
      "2 3   # inline note\n"
      "4 5\n";
  auto g = mtd::load_edge_list(text);
  CHECK(g.node_count() == 5);
  CHECK(g.ordered_edge_count() == 6);
  CHECK(g.has_edge(0, 1));  // file is 1-based, structure is 0-based
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(3, 4));
  CHECK_FALSE(g.has_edge(2, 3));
}

TEST_CASE("edge list parser infers node count when no header is given") {
  auto g = mtd::load_edge_list("1 2\n2 7\n");
  CHECK(g.node_count() == 7);
  CHECK(g.has_edge(1, 6));
}

TEST_CASE("edge list parser reports the offending line") {
  using Catcher = mtd::ValidationError;
  CHECK_THROWS_WITH_AS(mtd::load_edge_list("1 2\nfoo bar\n"),
                       doctest::Contains("line 2"), Catcher);
  CHECK_THROWS_WITH_AS(mtd::load_edge_list("n=3\n1 4\n"),
                       doctest::Contains("line 2"), Catcher);
  CHECK_THROWS_WITH_AS(mtd::load_edge_list("0 2\n"), doctest::Contains("line 1"),
                       Catcher);
  CHECK_THROWS_AS(mtd::load_edge_list("3 3\n"), Catcher);
  CHECK_THROWS_AS(mtd::load_edge_list(""), Catcher);
}

TEST_CASE("edge list file loader round-trips through disk") {
  const std::string path = std::string(MTD_TEST_DATA_DIR) + "/triangle.edges";
  auto g = mtd::load_edge_list_file(path);
  CHECK(g.node_count() == 3);
  CHECK(g.ordered_edge_count() == 6);
  CHECK(g.spectral_radius() == doctest::Approx(2.0).epsilon(1e-9));

  CHECK_THROWS_AS(mtd::load_edge_list_file("/nonexistent/nope.edges"),
                  mtd::ValidationError);
}
