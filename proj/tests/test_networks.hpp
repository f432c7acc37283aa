#pragma once

#include <algorithm>
#include <random>

#include "csynth/sysmodel/network.hpp"

namespace testnet {

using csynth::geom::Zonotope;
using csynth::sysmodel::Coupling;
using csynth::sysmodel::Mode;
using csynth::sysmodel::Network;
using csynth::sysmodel::Subsystem;

inline Subsystem subsystem(int id, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Zonotope& x,
                           const Zonotope& u, const Zonotope& d) {
  Subsystem s;
  s.id = id;
  s.n = static_cast<int>(a.rows());
  s.m = static_cast<int>(b.cols());
  s.a = {a};
  s.b = {b};
  s.x_bound = {x};
  s.u_bound = {u};
  s.d_set = {d};
  return s;
}

/// x_i receives a x_j + b u_j.
inline void couple(Network& net, int i, int j, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto& s = net.subsystems[static_cast<std::size_t>(i)];
  s.couplings.push_back({j, {a}, {b}});
  std::sort(s.couplings.begin(), s.couplings.end(),
            [](const Coupling& l, const Coupling& r) { return l.source < r.source; });
}

inline Zonotope box(const Eigen::VectorXd& r) { return {Eigen::VectorXd::Zero(r.size()), r.asDiagonal()}; }

/// Three coupled double integrators with the state coupling matrix used in
/// the first worked example (couplings on states only) and D = 0.01 I.
inline Network three_coupled(double d = 0.01, double u = 10.0) {
  Eigen::MatrixXd big(6, 6);
  big << 1, 1.1, 0.1, 0.01, 0.8, 0.1,  //
      0, 1, 0.1, 0.01, 0.8, 0.1,       //
      0.1, 0.01, 1, 1.1, 0.4, 0.01,    //
      0.1, 0.01, 0, 1, 0.4, 0.01,      //
      0.02, 0.0001, 0.01, 0.0001, 1, 1.1,  //
      0.02, 0.0001, 0.01, 0.0001, 1, 1;
  Network net;
  net.mode = Mode::Infinite;
  Eigen::MatrixXd b(2, 1);
  b << 0, 0.1;
  for (int i = 0; i < 3; ++i)
    net.subsystems.push_back(subsystem(i + 1, big.block(2 * i, 2 * i, 2, 2), b, box(Eigen::Vector2d(1, 1)),
                                       Zonotope(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, u)),
                                       box(Eigen::Vector2d(d, d))));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) couple(net, i, j, big.block(2 * i, 2 * j, 2, 2), Eigen::MatrixXd::Zero(2, 1));
  return net;
}

/// Random small planar network: all points within a disc of radius 4 so
/// every pair is coupled.
inline Network random_small(std::mt19937_64& rng, int count, double lambda) {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < count; ++i) pts.emplace_back(u(rng), u(rng));
  return csynth::sysmodel::planar_network(pts, lambda);
}

/// Same network with finite horizon h and the data repeated at every step.
inline Network as_finite(Network net, int h) {
  net.mode = Mode::Finite;
  net.horizon = h;
  return net;
}

}  // namespace testnet
