#include "csynth/geom/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace csynth::geom {

std::vector<Eigen::Vector2d> polygon_vertices_2d(const Zonotope& z) {
  if (z.dim() != 2) throw DimensionError("polygon_vertices_2d: zonotope must be 2-D");
  const Eigen::Vector2d c = z.center();
  const double scale = z.num_generators() > 0 ? z.generators().cwiseAbs().maxCoeff() : 0.0;
  const double eps = 1e-12 * std::max(1.0, scale);

  struct Gen {
    Eigen::Vector2d g;
    double angle;
  };
  std::vector<Gen> gens;
  for (int k = 0; k < z.num_generators(); ++k) {
    Eigen::Vector2d g = z.generators().col(k);
    if (g.norm() <= eps) continue;
    // orient into the upper half plane, angle in [0, pi)
    if (g.y() < 0.0 || (g.y() == 0.0 && g.x() < 0.0)) g = -g;
    double angle = std::atan2(g.y(), g.x());
    if (angle >= M_PI) angle -= M_PI;
    gens.push_back({g, angle});
  }
  std::sort(gens.begin(), gens.end(), [](const Gen& a, const Gen& b) { return a.angle < b.angle; });

  // merge parallel generators
  std::vector<Eigen::Vector2d> merged;
  double last_angle = -1.0;
  for (const Gen& g : gens) {
    if (!merged.empty() && std::abs(g.angle - last_angle) < 1e-12) {
      merged.back() += g.g;
    } else {
      merged.push_back(g.g);
      last_angle = g.angle;
    }
  }
  // an angle near pi is parallel to one near 0
  if (merged.size() > 1) {
    const Eigen::Vector2d& first = merged.front();
    const Eigen::Vector2d& last = merged.back();
    if (std::abs(first.x() * last.y() - first.y() * last.x()) <= 1e-12 * first.norm() * last.norm()) {
      merged.front() += first.dot(last) >= 0 ? last : Eigen::Vector2d(-last);
      merged.pop_back();
    }
  }

  if (merged.empty()) return {c};
  Eigen::Vector2d v = c;
  for (const auto& g : merged) v += g;
  std::vector<Eigen::Vector2d> ring;
  ring.reserve(2 * merged.size());
  ring.push_back(v);
  for (const auto& g : merged) {
    v -= 2.0 * g;
    ring.push_back(v);
  }
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    v += 2.0 * merged[k];
    ring.push_back(v);
  }
  return ring;
}

double polygon_area(const std::vector<Eigen::Vector2d>& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Eigen::Vector2d& a = ring[i];
    const Eigen::Vector2d& b = ring[(i + 1) % ring.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * std::abs(twice);
}

void write_polygon_csv(std::ostream& os, const std::vector<Eigen::Vector2d>& ring) {
  os << "x,y\n";
  if (ring.empty()) return;
  const auto old = os.precision(12);
  for (const auto& v : ring) os << v.x() << "," << v.y() << "\n";
  os << ring.front().x() << "," << ring.front().y() << "\n";
  os.precision(old);
}

}  // namespace csynth::geom
