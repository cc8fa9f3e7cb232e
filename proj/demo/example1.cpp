// Two-vertex network: v2 drives v1, each vertex has one input.
// Network DMDc recovers A and B from three snapshots; standard DMDc cannot.

#include <iostream>

#include "netdmd/netdmd.hpp"

int main() {
  using namespace netdmd;

  LinearNetworkSystem s;
  s.topology.state_vertices = {{"v1", 1}, {"v2", 1}};
  s.topology.input_vertices = {{"e1", 1}, {"e2", 1}};
  s.topology.edges = {{"e1", "v1"}, {"v2", "v1"}, {"e2", "v2"}};
  s.self_blocks["v1"] = Matrix::Constant(1, 1, 1.2);
  s.self_blocks["v2"] = Matrix::Constant(1, 1, 0.8);
  s.edge_blocks[Edge{"e1", "v1"}] = Matrix::Constant(1, 1, 1.0);
  s.edge_blocks[Edge{"v2", "v1"}] = Matrix::Constant(1, 1, -0.5);
  s.edge_blocks[Edge{"e2", "v2"}] = Matrix::Constant(1, 1, 1.0);

  const Vector x0 = (Vector(2) << 2.0, 5.0).finished();
  const Matrix u = (Matrix(2, 3) << 0.2, 0.4, 0.8, 0.3, 0.1, 0.3).finished();
  const auto traj = simulate(s, x0, u);
  const auto [a, b] = true_full_matrices(s);

  const auto net = network_dmdc_exact(s.topology, traj);
  const auto dense = dmdc_exact(traj.z, traj.y, traj.gamma);

  std::cout << "network DMDc A =\n" << net.assembled_a << "\nB =\n" << net.assembled_b << '\n';
  std::cout << "network DMDc error:  " << model_error(net, a, b) << '\n';
  std::cout << "standard DMDc error: " << model_error(dense, a, b) << '\n';
}
