#pragma once

#include <iosfwd>
#include <vector>

#include "csynth/geom/zonotope.hpp"

namespace csynth::geom {

/// Vertices of a 2-D zonotope in counter-clockwise order, starting from the
/// vertex c + sum of upward-oriented generators. Parallel generators are
/// merged; a segment yields its two endpoints and a point yields one vertex.
std::vector<Eigen::Vector2d> polygon_vertices_2d(const Zonotope& z);

/// Shoelace area of a vertex ring (open ring, no repeated first vertex).
double polygon_area(const std::vector<Eigen::Vector2d>& ring);

/// Writes "x,y" lines for a closed ring (first vertex repeated at the end).
void write_polygon_csv(std::ostream& os, const std::vector<Eigen::Vector2d>& ring);

}  // namespace csynth::geom
