#include "ginet/netcore.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace ginet;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("ER generator hits the expected edge count on average and is seeded") {
  // Binomial(C(100,2), 0.04): mean 198, sd 13.787. Averaging over 200 seeds
  // shrinks the sd of the mean to 0.975; allow 3 sd.
  const int seeds = 200;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const Graph g = generate_er(100, 0.04, static_cast<std::uint64_t>(s));
    g.validate();
    total += g.num_edges();
  }
  const double mean = total / seeds;
  CHECK(std::abs(mean - 198.0) < 3.0 * 13.787 / std::sqrt(static_cast<double>(seeds)));

  const Graph a = generate_er(50, 0.1, 777);
  const Graph b = generate_er(50, 0.1, 777);
  CHECK(a.adj == b.adj);
  CHECK_THROWS_AS(generate_er(10, 1.5, 1), ParameterError);
  CHECK_THROWS_AS(generate_er(0, 0.5, 1), ParameterError);
}

TEST_CASE("edge probabilities p=0 and p=1 give empty and complete graphs") {
  CHECK(generate_er(20, 0.0, 3).num_edges() == 0);
  CHECK(generate_er(20, 1.0, 3).num_edges() == 190);
}

TEST_CASE("WS rewiring preserves the lattice edge count") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = generate_ws(10, 4, 0.3, seed);
    g.validate();
    CHECK(g.num_edges() == 20);  // n*k/2
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = generate_ws(100, 4, 0.3, seed);
    g.validate();
    CHECK(g.num_edges() == 200);
  }
  // p_rewire = 0 leaves the ring lattice intact.
  const Graph ring = generate_ws(10, 4, 0.0, 5);
  for (int i = 0; i < 10; ++i) {
    CHECK(ring.has_edge(i, (i + 1) % 10));
    CHECK(ring.has_edge(i, (i + 2) % 10));
  }
  CHECK_THROWS_AS(generate_ws(10, 3, 0.3, 1), ParameterError);  // odd k
  CHECK_THROWS_AS(generate_ws(4, 4, 0.3, 1), ParameterError);   // k >= n
}

TEST_CASE("BA attachment adds exactly k edges per new node") {
  const Graph g = generate_ba(100, 20, 2, 9);
  g.validate();
  CHECK(g.num_edges() == 20 + 80 * 2);  // ring seed + k per newcomer
  for (int v = 20; v < 100; ++v) CHECK(g.degree(v) >= 2);
  const Graph h = generate_ba(100, 20, 2, 9);
  CHECK(g.adj == h.adj);
  CHECK_THROWS_AS(generate_ba(10, 2, 2, 1), ParameterError);   // m0 too small
  CHECK_THROWS_AS(generate_ba(10, 5, 6, 1), ParameterError);   // k > m0
}

TEST_CASE("BA hubs attract more links than latecomers on average") {
  double early = 0.0, late = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = generate_ba(200, 20, 2, seed);
    for (int v = 0; v < 20; ++v) early += g.degree(v);
    for (int v = 180; v < 200; ++v) late += g.degree(v);
  }
  CHECK(early / 30 / 20 > 2.0 * late / 30 / 20);
}

TEST_CASE("node partitions are uniform draws with valid bookkeeping") {
  const NodePartition p = partition_nodes(100, 10, 4);
  CHECK(p.n() == 100);
  CHECK(p.n_hidden() == 10);
  CHECK(p.n_observed() == 90);
  p.validate(100);
  const NodePartition q = partition_nodes(100, 10, 4);
  CHECK(p.hidden == q.hidden);
  CHECK_THROWS_AS(partition_nodes(10, 10, 1), ParameterError);
  CHECK_THROWS_AS(partition_nodes(10, -1, 1), ParameterError);

  // Zero hidden nodes is the reconstruction setting.
  const NodePartition full = partition_nodes(5, 0, 1);
  CHECK(full.hidden.empty());
  CHECK(full.n_observed() == 5);
}

TEST_CASE("unobserved mask is the inverted-L with n^2 - n_obs^2 true entries") {
  NodePartition p;
  p.observed = {0, 1};
  p.hidden = {2};
  const BoolMatrix mask = unobserved_mask(p);
  int count = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (mask(i, j)) ++count;
  CHECK(count == 5);  // 3^2 - 2^2
  CHECK_FALSE(mask(0, 0));
  CHECK_FALSE(mask(0, 1));
  CHECK(mask(0, 2));
  CHECK(mask(2, 0));
  CHECK(mask(2, 2));

  const NodePartition big = partition_nodes(100, 10, 7);
  const BoolMatrix bm = unobserved_mask(big);
  long total = 0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j)
      if (bm(i, j)) ++total;
  CHECK(total == 100 * 100 - 90 * 90);
}

TEST_CASE("reordering the adjacency moves hidden nodes to the last rows") {
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  NodePartition p;
  p.observed = {0, 2};
  p.hidden = {1, 3};
  const IntMatrix a = reorder_adjacency(g, p);
  // order = [0, 2, 1, 3]; edge (0,1) -> (0,2); (1,2) -> (2,1); (2,3) -> (1,3)
  CHECK(a(0, 2) == 1);
  CHECK(a(2, 1) == 1);
  CHECK(a(1, 3) == 1);
  CHECK(a(0, 1) == 0);
  CHECK(a.sum() == 6);
}

TEST_CASE("structural stats match hand-computed values on tiny graphs") {
  Graph triangle(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(0, 2);
  const StructuralStats ts = structural_stats(triangle);
  CHECK(ts.average_degree == doctest::Approx(2.0));
  CHECK(ts.density == doctest::Approx(1.0));
  CHECK(ts.average_clustering == doctest::Approx(1.0));
  CHECK(ts.average_path_length == doctest::Approx(1.0));
  CHECK(ts.largest_component == 3);

  // Path 0-1-2-3: distances 1,2,3,1,2,1 -> mean 10/6; no triangles.
  Graph path(4);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  path.add_edge(2, 3);
  const StructuralStats ps = structural_stats(path);
  CHECK(ps.average_clustering == doctest::Approx(0.0));
  CHECK(ps.average_path_length == doctest::Approx(10.0 / 6.0));

  // Disconnected: triangle plus isolated pair; stats restricted to the larger
  // component.
  Graph two(5);
  two.add_edge(0, 1);
  two.add_edge(1, 2);
  two.add_edge(0, 2);
  two.add_edge(3, 4);
  const StructuralStats ds = structural_stats(two);
  CHECK(ds.largest_component == 3);
  CHECK(ds.average_path_length == doctest::Approx(1.0));
}

TEST_CASE("bundled karate club graph matches its published statistics") {
  const Graph g = load_edge_list(std::string(GINET_DATA_DIR) + "/karate.csv");
  CHECK(g.n == 34);
  CHECK(g.num_edges() == 78);
  const StructuralStats s = structural_stats(g);
  CHECK(s.average_degree == doctest::Approx(2.0 * 78 / 34));
  CHECK(s.average_clustering == doctest::Approx(0.5706).epsilon(0.001));
  CHECK(s.largest_component == 34);
}

TEST_CASE("edge list round trip preserves the graph and rejects malformed files") {
  const Graph g = generate_ws(12, 4, 0.3, 21);
  const std::string path = tmp_path("ginet_edges_test.csv");
  save_edge_list(g, path);
  const Graph r = load_edge_list(path);
  CHECK(r.adj == g.adj);
  std::remove(path.c_str());

  const std::string bad = tmp_path("ginet_edges_bad.csv");
  auto write_file = [&](const std::string& text) {
    std::ofstream out(bad);
    out << text;
  };
  write_file("src,dst\n0,0\n");
  CHECK_THROWS_AS(load_edge_list(bad), ParseError);  // self-loop
  write_file("src,dst\n0,1\n1,0\n");
  CHECK_THROWS_AS(load_edge_list(bad), ParseError);  // duplicate (reversed)
  write_file("src,dst\n0,1\n0,3\n");
  CHECK_THROWS_AS(load_edge_list(bad), ParseError);  // gap: id 2 missing
  write_file("0,1\n");
  CHECK_THROWS_AS(load_edge_list(bad), ParseError);  // missing header
  write_file("src,dst\n0,x\n");
  CHECK_THROWS_AS(load_edge_list(bad), ParseError);  // non-integer
  write_file("src,dst\n0,5\n");
  CHECK_THROWS_AS(load_edge_list(bad, 3), ParameterError);  // id beyond declared n
  std::remove(bad.c_str());
  CHECK_THROWS_AS(load_edge_list(tmp_path("ginet_missing_file.csv")), IoError);
}

TEST_CASE("partition files round trip") {
  const NodePartition p = partition_nodes(34, 3, 8);
  const std::string path = tmp_path("ginet_partition_test.json");
  save_partition(p, path);
  const NodePartition r = load_partition(path);
  CHECK(r.hidden == p.hidden);
  CHECK(r.observed == p.observed);
  std::remove(path.c_str());
}
