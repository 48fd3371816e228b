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

#include "blameless/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "blameless/random.hpp"

namespace blameless {

namespace {

Point2 sample_in_box(CounterRng& rng, const std::array<Point2, 2>& box) {
  return {rng.uniform(box[0].x(), box[1].x()), rng.uniform(box[0].y(), box[1].y())};
}

// Most negative barycentric coordinate of x in the triangle; >= 0 means inside.
double barycentric_margin(const std::array<Point2, 3>& t, const Point2& x) {
  const double area = orient(t[0], t[1], t[2]);
  const double l0 = orient(t[1], t[2], x) / area;
  const double l1 = orient(t[2], t[0], x) / area;
  const double l2 = orient(t[0], t[1], x) / area;
  return std::min({l0, l1, l2});
}

AffinePiece fit_plane(const std::array<Point2, 3>& tri, const std::array<double, 3>& values,
                      std::size_t annulus) {
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int k = 0; k < 3; ++k) {
    m.row(k) << tri[k].x(), tri[k].y(), 1.0;
    rhs(k) = values[k];
  }
  const Eigen::Vector3d sol = m.fullPivLu().solve(rhs);
  AffinePiece piece;
  piece.alpha = sol.head<2>();
  piece.beta = sol(2);
  piece.triangle = tri;
  piece.annulus = annulus;
  for (int k = 0; k < 3; ++k) {
    const double scale = 1.0 + std::abs(values[k]);
    if (std::abs(piece(tri[k]) - values[k]) > 1e-10 * scale) {
      throw Error(ErrorKind::DegenerateTriangle, "plane fit does not interpolate its vertices");
    }
  }
  return piece;
}

}  // namespace

PiecewiseAffineObjective::PiecewiseAffineObjective(NestedFamily family, std::vector<double> level_values,
                                                   std::vector<AffinePiece> pieces)
    : family_(std::move(family)), level_values_(std::move(level_values)), pieces_(std::move(pieces)) {
  if (level_values_.size() != family_.size()) {
    throw Error(ErrorKind::DegenerateInput, "one level value per nested set is required");
  }
  for (std::size_t i = 1; i < level_values_.size(); ++i) {
    if (!(level_values_[i] > level_values_[i - 1])) {
      throw Error(ErrorKind::DegenerateInput, "level values must be strictly increasing");
    }
  }
}

std::vector<double> assign_boundary_values(const NestedFamily& family, double g0, double g1) {
  const std::size_t m = family.size();
  if (m < 2) throw Error(ErrorKind::DegenerateInput, "boundary values need at least two nested sets");
  if (!(g1 > g0)) throw Error(ErrorKind::DegenerateInput, "g1 must exceed g0");

  std::vector<double> g{g0, g1};
  g.reserve(m);
  for (std::size_t i = 2; i < m; ++i) {
    // g on dY_{i+1} from the inner gap of annulus i-1 and the outer spread of annulus i.
    const double d_min = boundary_min_distance(family.level(i - 1), family.level(i));
    const double d_max = boundary_max_distance(family.level(i), family.level(i + 1));
    if (d_min < kSepTol) throw Error(ErrorKind::BoundaryOverlap, "nested boundaries touch");
    g.push_back(g[i - 1] + (d_max / d_min) * (g[i - 1] - g[i - 2]));
  }
  return g;
}

PiecewiseAffineObjective generate_objective(const NestedFamily& family, double g0, double g1) {
  const std::size_t m = family.size();
  if (m == 1) {
    // Single set: one piece per facet, slope (g1 - g0) per unit of facet distance.
    if (!(g1 > g0)) throw Error(ErrorKind::DegenerateInput, "g1 must exceed g0");
    std::vector<AffinePiece> pieces;
    for (const auto& h : family.level(1).halfspaces()) {
      AffinePiece piece;
      piece.alpha = (g1 - g0) * h.normal;
      piece.beta = g0 - (g1 - g0) * h.offset;
      pieces.push_back(piece);
    }
    return PiecewiseAffineObjective(family, {g0}, std::move(pieces));
  }

  std::vector<double> levels = assign_boundary_values(family, g0, g1);
  std::vector<AffinePiece> pieces;
  for (std::size_t i = 1; i < m; ++i) {
    const Polytope2& inner = family.level(i);
    const Polytope2& outer = family.level(i + 1);
    PointList pts(inner.vertices().begin(), inner.vertices().end());
    pts.insert(pts.end(), outer.vertices().begin(), outer.vertices().end());
    const std::size_t n_inner = inner.size();

    for (const auto& tri : delaunay_triangulate(pts)) {
      const std::array<Point2, 3> corners{pts[tri.idx[0]], pts[tri.idx[1]], pts[tri.idx[2]]};
      const Point2 centroid = (corners[0] + corners[1] + corners[2]) / 3.0;
      if (!contains(outer, centroid, kGeomTol) || interior_contains(inner, centroid, kGeomTol)) continue;
      if (0.5 * orient(corners[0], corners[1], corners[2]) < kAreaTol) {
        throw Error(ErrorKind::DegenerateTriangle, "annulus triangle has no area");
      }
      std::array<double, 3> values{};
      for (int k = 0; k < 3; ++k) values[k] = tri.idx[k] < n_inner ? levels[i - 1] : levels[i];
      pieces.push_back(fit_plane(corners, values, i));
    }
  }

  PiecewiseAffineObjective obj(family, std::move(levels), std::move(pieces));
  if (!(scaled_vertex_error(obj) <= kValTol)) {
    throw Error(ErrorKind::ValidationFailure, "max-form disagrees with assigned boundary values (error " +
                                                  std::to_string(vertex_agreement_error(obj)) + ")");
  }
  return obj;
}

double evaluate(const PiecewiseAffineObjective& obj, const Point2& x) {
  const double g0 = obj.base_value();
  if (contains(obj.base_region(), x, kGeomTol)) return g0;
  double v = g0;
  for (const auto& piece : obj.pieces()) v = std::max(v, piece(x));
  return v;
}

double evaluate_interpolant(const PiecewiseAffineObjective& obj, const Point2& x) {
  const Polytope2& outer = obj.family().level(obj.family().size());
  if (!contains(outer, x, kGeomTol)) throw Error(ErrorKind::OutsideDomain, "point lies outside Y_m");
  if (contains(obj.base_region(), x, kGeomTol)) return obj.base_value();

  const AffinePiece* best = nullptr;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (const auto& piece : obj.pieces()) {
    const double margin = barycentric_margin(piece.triangle, x);
    if (margin >= -1e-12) return piece(x);
    if (margin > best_margin) {
      best_margin = margin;
      best = &piece;
    }
  }
  // Only reachable on rounding seams between triangles.
  if (best == nullptr) throw Error(ErrorKind::OutsideDomain, "no region contains the point");
  return (*best)(x);
}

double vertex_agreement_error(const PiecewiseAffineObjective& obj) {
  double err = 0.0;
  const auto& levels = obj.level_values();
  for (std::size_t i = 1; i <= obj.family().size(); ++i) {
    for (const auto& v : obj.family().level(i).vertices()) {
      err = std::max(err, std::abs(evaluate(obj, v) - levels[i - 1]));
    }
  }
  return err;
}

double scaled_vertex_error(const PiecewiseAffineObjective& obj) {
  double err = 0.0;
  const auto& levels = obj.level_values();
  for (std::size_t i = 1; i <= obj.family().size(); ++i) {
    for (const auto& v : obj.family().level(i).vertices()) {
      err = std::max(err, std::abs(evaluate(obj, v) - levels[i - 1]) / std::max(1.0, std::abs(levels[i - 1])));
    }
  }
  return err;
}

ValidationReport validate_objective(const PiecewiseAffineObjective& obj, const ValidationOptions& opts) {
  ValidationReport report;
  report.max_vertex_error = vertex_agreement_error(obj);

  const NestedFamily& family = obj.family();
  const std::size_t m = family.size();
  const Polytope2& outer = family.level(m);
  const auto outer_box = outer.bounding_box();

  constexpr std::size_t kMaxAttempts = 1000;
  for (std::size_t i = 1; i < m; ++i) {
    const Polytope2& inner = family.level(i);
    const auto inner_box = inner.bounding_box();
    CounterRng rng(opts.seed, 0x1000 + i);
    for (std::size_t k = 0; k < opts.pairs_per_level; ++k) {
      Point2 x = sample_in_box(rng, inner_box);
      for (std::size_t a = 0; a < kMaxAttempts && !contains(inner, x, 0.0); ++a) x = sample_in_box(rng, inner_box);
      Point2 y = sample_in_box(rng, outer_box);
      for (std::size_t a = 0; a < kMaxAttempts && (contains(inner, y, 0.0) || !contains(outer, y, 0.0)); ++a) {
        y = sample_in_box(rng, outer_box);
      }
      if (!contains(inner, x, 0.0) || contains(inner, y, 0.0) || !contains(outer, y, 0.0)) continue;
      ++report.monotonicity_pairs;
      const double gy = evaluate(obj, y);
      if (evaluate(obj, x) > gy + value_tolerance(gy)) ++report.monotonicity_violations;
    }
  }

  std::array<Point2, 2> wide = outer_box;
  const Point2 pad = 0.1 * (wide[1] - wide[0]);
  wide[0] -= pad;
  wide[1] += pad;
  CounterRng rng(opts.seed, 0x2000);
  for (std::size_t k = 0; k < opts.convexity_triples; ++k) {
    const Point2 x = sample_in_box(rng, wide);
    const Point2 y = sample_in_box(rng, wide);
    const double gx = evaluate(obj, x);
    const double gy = evaluate(obj, y);
    ++report.convexity_triples;
    const double avg = 0.5 * (gx + gy);
    if (evaluate(obj, 0.5 * (x + y)) > avg + value_tolerance(avg)) ++report.convexity_violations;
  }

  report.passed = scaled_vertex_error(obj) <= kValTol && report.monotonicity_violations == 0 &&
                  report.convexity_violations == 0;
  return report;
}

}  // namespace blameless
