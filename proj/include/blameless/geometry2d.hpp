/*
 Copyright 2026 The blameless-ctrl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef BLAMELESS_GEOMETRY2D_HPP
#define BLAMELESS_GEOMETRY2D_HPP

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "blameless/error.hpp"

namespace blameless {

using Point2 = Eigen::Vector2d;
using PointList = std::vector<Point2, Eigen::aligned_allocator<Point2>>;

inline constexpr double kGeomTol = 1e-9;   // vertex / halfspace agreement
inline constexpr double kSepTol = 1e-6;    // minimum gap between nested boundaries
inline constexpr double kAreaTol = 1e-12;  // degenerate triangle / polygon area
inline constexpr double kCircTol = 1e-9;   // in-circle predicate slack

/// a . x <= b with |a| = 1.
struct Halfspace {
  Eigen::Vector2d normal;
  double offset = 0.0;

  double signed_distance(const Point2& p) const { return normal.dot(p) - offset; }
};

using HalfspaceList = std::vector<Halfspace, Eigen::aligned_allocator<Halfspace>>;

/// Bounded convex polygon held in both vertex and halfspace form.
///
/// Vertices are counter-clockwise, start at the lexicographically smallest
/// (x, then y) vertex, and contain no collinear triples. Halfspace j is the
/// edge from vertex j to vertex j+1.
class Polytope2 {
 public:
  static Polytope2 from_vertices(std::span<const Point2> points);
  static Polytope2 from_halfspaces(std::span<const Halfspace> halfspaces);
  /// Axis-aligned box [x_lo, x_hi] x [y_lo, y_hi].
  static Polytope2 box(double x_lo, double x_hi, double y_lo, double y_hi);

  const PointList& vertices() const { return vertices_; }
  const HalfspaceList& halfspaces() const { return halfspaces_; }
  std::size_t size() const { return vertices_.size(); }

  double area() const;
  Point2 vertex_centroid() const;
  /// Lower-left and upper-right corners of the bounding box.
  std::array<Point2, 2> bounding_box() const;

 private:
  Polytope2(PointList vertices, HalfspaceList halfspaces)
      : vertices_(std::move(vertices)), halfspaces_(std::move(halfspaces)) {}

  PointList vertices_;
  HalfspaceList halfspaces_;
};

struct Triangle {
  std::array<std::size_t, 3> idx{};
  Point2 circumcenter = Point2::Zero();
  double circumradius = 0.0;
};

/// Y_1 ⊆ Y_2 ⊆ ... ⊆ Y_m, validated on construction.
class NestedFamily {
 public:
  /// Throws NotNested or BoundaryOverlap when the invariants fail.
  explicit NestedFamily(std::vector<Polytope2> sets);

  const std::vector<Polytope2>& sets() const { return sets_; }
  /// 1-based, matching the priority index.
  const Polytope2& level(std::size_t i) const { return sets_.at(i - 1); }
  std::size_t size() const { return sets_.size(); }

 private:
  std::vector<Polytope2> sets_;
};

// Signed twice-area of (a, b, c); positive for a counter-clockwise turn.
double orient(const Point2& a, const Point2& b, const Point2& c);

PointList convex_hull(std::span<const Point2> points);
HalfspaceList vertices_to_halfspaces(std::span<const Point2> vertices);
PointList halfspaces_to_vertices(std::span<const Halfspace> halfspaces);

bool contains(const Polytope2& poly, const Point2& p, double tol = kGeomTol);
/// Strict interior test: every halfspace satisfied with margin `tol`.
bool interior_contains(const Polytope2& poly, const Point2& p, double tol = kGeomTol);

Polytope2 intersect(const Polytope2& p, const Polytope2& q);

/// Y_i = Z_1 ∩ ... ∩ Z_{m+1-i}, so Y_m = Z_1 and Y_1 is the full intersection.
NestedFamily nested_from_prioritized(std::span<const Polytope2> prioritized);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
double boundary_min_distance(const Polytope2& inner, const Polytope2& outer);
double boundary_max_distance(const Polytope2& p, const Polytope2& q);

std::vector<Triangle> delaunay_triangulate(std::span<const Point2> points);

}  // namespace blameless

#endif  // BLAMELESS_GEOMETRY2D_HPP
