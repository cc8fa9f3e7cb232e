#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netdmd/sysmodel.hpp"
#include "test_support.hpp"

using namespace netdmd;
using netdmd::testing::example1_system;

namespace {

GeneratorConfig circular(std::size_t n, std::size_t period, std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.family = CircularFamily{n, period};
  cfg.seed = seed;
  return cfg;
}

GeneratorConfig erdos_renyi(std::size_t n, double p, std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.family = ErdosRenyiFamily{n, p};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(Step, ExampleOne) {
  const auto s = example1_system();
  const Vector a = step(s, (Vector(2) << 2, 5).finished(), (Vector(2) << 0.2, 0.3).finished());
  EXPECT_NEAR(a(0), 0.1, 1e-15);
  EXPECT_NEAR(a(1), 4.3, 1e-15);
  const Vector b = step(s, (Vector(2) << 0.1, 4.3).finished(), (Vector(2) << 0.4, 0.1).finished());
  EXPECT_NEAR(b(0), -1.63, 1e-14);
  EXPECT_NEAR(b(1), 3.54, 1e-14);
  EXPECT_TRUE(step(s, Vector::Zero(2), Vector::Zero(2)).isZero(0.0));
}

TEST(Step, DimensionMismatch) {
  const auto s = example1_system();
  try {
    step(s, Vector::Zero(3), Vector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW(step(s, Vector::Zero(2), Vector::Zero(1)), Error);
}

TEST(Simulate, ExampleOneMatrices) {
  const auto traj = netdmd::testing::example1_trajectory();
  Matrix z(2, 3), y(2, 3);
  z << 2, 0.1, -1.63, 5, 4.3, 3.54;
  y << 0.1, -1.63, -2.926, 4.3, 3.54, 3.132;
  EXPECT_LE((traj.z - z).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((traj.y - y).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_TRUE(traj.gamma == netdmd::testing::example1_inputs());
  // Successor chaining is exact.
  EXPECT_TRUE(traj.z.rightCols(2) == traj.y.leftCols(2));
  EXPECT_EQ(traj.state_rows.at("v2"), (RowRange{1, 1}));
  EXPECT_EQ(traj.input_rows.at("e1"), (RowRange{0, 1}));
}

TEST(Simulate, SingleStepAndZeroSystem) {
  auto s = example1_system();
  const auto one = simulate(s, netdmd::testing::example1_x0(), netdmd::testing::example1_inputs().leftCols(1));
  EXPECT_EQ(one.z.cols(), 1);
  EXPECT_EQ(one.y.cols(), 1);

  for (auto& [id, b] : s.self_blocks) b.setZero();
  for (auto& [e, b] : s.edge_blocks) b.setZero();
  const auto zero = simulate(s, netdmd::testing::example1_x0(), netdmd::testing::example1_inputs());
  EXPECT_TRUE(zero.y.isZero(0.0));
  EXPECT_THROW(simulate(s, Vector::Zero(2), Matrix(2, 0)), Error);
}

TEST(TrueFullMatrices, ExampleOne) {
  const auto [a, b] = true_full_matrices(example1_system());
  EXPECT_TRUE(a == (Matrix(2, 2) << 1.2, -0.5, 0, 0.8).finished());
  EXPECT_TRUE(b == Matrix::Identity(2, 2));
}

TEST(TrueFullMatrices, ZeroSystemAndRingSparsity) {
  auto s = example1_system();
  for (auto& [id, blk] : s.self_blocks) blk.setZero();
  for (auto& [e, blk] : s.edge_blocks) blk.setZero();
  const auto [a0, b0] = true_full_matrices(s);
  EXPECT_TRUE(a0.isZero(0.0));
  EXPECT_TRUE(b0.isZero(0.0));

  // Three-vertex ring without inputs: 3 self blocks + 3 ring edges.
  LinearNetworkSystem ring;
  ring.topology.state_vertices = {{"v1", 1}, {"v2", 1}, {"v3", 1}};
  ring.topology.edges = {{"v1", "v2"}, {"v2", "v3"}, {"v3", "v1"}};
  Rng rng(4);
  for (const auto& v : ring.topology.state_vertices)
    ring.self_blocks[v.id] = Matrix::Constant(1, 1, rng.uniform(0.1, 1.0));
  for (const auto& e : ring.topology.edges) ring.edge_blocks[e] = Matrix::Constant(1, 1, rng.uniform(0.1, 1.0));
  const auto [a, b] = true_full_matrices(ring);
  EXPECT_EQ((a.array() != 0.0).count(), 6);
  EXPECT_EQ(b.cols(), 0);
  EXPECT_NE(a(1, 0), 0.0);  // v1 -> v2 lands in row v2, column v1
  EXPECT_NE(a(0, 2), 0.0);
}

TEST(CheckBlocks, RejectsMissingAndMisshapen) {
  auto s = example1_system();
  s.edge_blocks.erase(Edge{"e1", "v1"});
  EXPECT_THROW(check_blocks(s), Error);
  s = example1_system();
  s.self_blocks["v1"] = Matrix::Zero(2, 2);
  EXPECT_THROW(check_blocks(s), Error);
  s = example1_system();
  s.edge_blocks[Edge{"e2", "v1"}] = Matrix::Zero(1, 1);
  EXPECT_THROW(check_blocks(s), Error);
}

TEST(SimulateProperty, SuccessorsMatchDenseModel) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = netdmd::testing::random_system(gen, 5, 3, 3, 0.5);
    const auto traj = netdmd::testing::random_trajectory(s, 6, gen);
    const auto [a, b] = true_full_matrices(s);
    const Matrix dense = a * traj.z + b * traj.gamma;
    EXPECT_LE((dense - traj.y).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, traj.y.cwiseAbs().maxCoeff()));
    EXPECT_TRUE(traj.z.rightCols(5) == traj.y.leftCols(5));
  }
}

TEST(GenCircular, SixVertexRing) {
  Rng rng(1);
  const auto s = gen_circular(circular(6, 2), rng);
  const auto& t = s.topology;
  EXPECT_EQ(t.state_vertices.size(), 6u);
  EXPECT_EQ(t.input_vertices.size(), 3u);
  EXPECT_EQ(t.edges.size(), 9u);
  for (int j = 0; j < 6; ++j) EXPECT_EQ(t.edges[static_cast<std::size_t>(j)], (Edge{"v" + std::to_string(j + 1), "v" + std::to_string((j + 1) % 6 + 1)}));
  EXPECT_EQ(t.edges[6], (Edge{"e1", "v1"}));
  EXPECT_EQ(t.edges[7], (Edge{"e2", "v3"}));
  EXPECT_EQ(t.edges[8], (Edge{"e3", "v5"}));
  EXPECT_TRUE(validate(t).empty());
  for (const auto& [id, blk] : s.self_blocks) {
    EXPECT_GE(blk(0, 0), -1.0);
    EXPECT_LT(blk(0, 0), 1.0);
  }
}

TEST(GenCircular, LargeRingLocalDimAndSmallCase) {
  Rng rng(2);
  EXPECT_EQ(max_local_dim(gen_circular(circular(50, 2), rng).topology), 3u);
  const auto small = gen_circular(circular(2, 3), rng);
  EXPECT_EQ(small.topology.input_vertices.size(), 1u);
  EXPECT_EQ(small.topology.edges.size(), 3u);  // 2 ring edges + e1 -> v1
  EXPECT_THROW(gen_circular(circular(1, 1), rng), Error);
  EXPECT_THROW(gen_circular(circular(5, 0), rng), Error);
  EXPECT_THROW(gen_circular(erdos_renyi(5, 0.5), rng), Error);
}

TEST(GenCircular, InvariantsOverSeeds) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = generate(circular(3 + seed % 20, 1 + seed % 4, seed));
    EXPECT_TRUE(validate(s.topology).empty());
    for (const auto& v : s.topology.state_vertices) {
      const auto local = local_subsystem(s.topology, v.id);
      EXPECT_LE(local.state_parents.size() + local.input_parents.size(), 2u);
      EXPECT_LE(local.input_parents.size(), 1u);
    }
  }
}

TEST(GenErdosRenyi, EdgeCounts) {
  Rng rng(3);
  EXPECT_TRUE(gen_erdos_renyi(erdos_renyi(10, 0.0), rng).topology.edges.empty());
  const auto full = gen_erdos_renyi(erdos_renyi(4, 1.0), rng);
  EXPECT_EQ(full.topology.edges.size(), 12u);
  EXPECT_TRUE(full.topology.input_vertices.empty());
  EXPECT_TRUE(validate(full.topology).empty());
  EXPECT_THROW(gen_erdos_renyi(erdos_renyi(4, 1.5), rng), Error);
}

TEST(GenErdosRenyi, MeanEdgeCountMatchesBinomial) {
  // Oracle: edge count ~ Binomial(n(n-1), p); the mean of 1000 draws has
  // standard deviation sqrt(N p (1-p) / 1000).
  const double pairs = 50.0 * 49.0, p = 0.05;
  const double expected = pairs * p;
  const double sd_of_mean = std::sqrt(pairs * p * (1.0 - p) / 1000.0);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    total += static_cast<double>(generate(erdos_renyi(50, p, seed)).topology.edges.size());
  EXPECT_NEAR(total / 1000.0, expected, 3.0 * sd_of_mean);
}

TEST(Generators, DeterministicPerSeed) {
  for (const auto& cfg : {circular(12, 2, 99), erdos_renyi(12, 0.3, 99)}) {
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    EXPECT_EQ(a.topology, b.topology);
    ASSERT_EQ(a.edge_blocks.size(), b.edge_blocks.size());
    for (const auto& [k, m] : a.self_blocks) EXPECT_EQ(m(0, 0), b.self_blocks.at(k)(0, 0));
    for (const auto& [k, m] : a.edge_blocks) EXPECT_EQ(m(0, 0), b.edge_blocks.at(k)(0, 0));
  }
  EXPECT_NE(generate(circular(12, 2, 1)).self_blocks.at("v1")(0, 0),
            generate(circular(12, 2, 2)).self_blocks.at("v1")(0, 0));
}

TEST(Rng, UnitIntervalAndStreamDerivation) {
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-10.0, 10.0);
    EXPECT_GE(x, -10.0);
    EXPECT_LT(x, 10.0);
  }
  // mt19937_64's 10000th output is fixed by the C++ standard.
  Rng ref(5489);
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = ref.next_u64();
  EXPECT_EQ(last, 9981545732273789042ULL);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
