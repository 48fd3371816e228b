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

#include "blameless/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include <Eigen/LU>

namespace blameless {

namespace {

// Relative slack used when pruning collinear hull vertices.
constexpr double kCollinearRel = 1e-12;

double extent(std::span<const Point2> points) {
  Point2 lo = points.front();
  Point2 hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).maxCoeff();
}

double polygon_area(std::span<const Point2> v) {
  double twice = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto& a = v[j];
    const auto& b = v[(j + 1) % v.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * twice;
}

bool all_inside(const Polytope2& outer, const PointList& pts, double tol) {
  return std::all_of(pts.begin(), pts.end(),
                     [&](const Point2& p) { return contains(outer, p, tol); });
}

}  // namespace

double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

PointList convex_hull(std::span<const Point2> points) {
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorKind::DegenerateInput, "non-finite point");
  }
  PointList pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw Error(ErrorKind::DegenerateInput, "fewer than 3 distinct points");

  const double scale = extent(pts);
  const double tol = kCollinearRel * scale * scale;

  // Andrew's monotone chain; a non-left turn pops, which also merges collinear runs.
  PointList hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= tol) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && orient(hull[k - 2], hull[k - 1], pts[i]) <= tol) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3 || polygon_area(hull) <= kAreaTol) {
    throw Error(ErrorKind::DegenerateInput, "points are collinear");
  }
  return hull;
}

HalfspaceList vertices_to_halfspaces(std::span<const Point2> vertices) {
  if (vertices.size() < 3) throw Error(ErrorKind::DegenerateInput, "need at least 3 vertices");
  HalfspaceList out;
  out.reserve(vertices.size());
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    const Point2& a = vertices[j];
    const Point2& b = vertices[(j + 1) % vertices.size()];
    const Eigen::Vector2d d = b - a;
    const double len = d.norm();
    if (!(len > kGeomTol)) throw Error(ErrorKind::DegenerateInput, "zero-length edge");
    Halfspace h;
    h.normal = Eigen::Vector2d(d.y(), -d.x()) / len;
    h.offset = h.normal.dot(a);
    out.push_back(h);
  }
  return out;
}

PointList halfspaces_to_vertices(std::span<const Halfspace> halfspaces) {
  if (halfspaces.size() < 3) throw Error(ErrorKind::Unbounded, "fewer than 3 halfspaces");

  HalfspaceList hs;
  hs.reserve(halfspaces.size());
  for (const auto& h : halfspaces) {
    const double n = h.normal.norm();
    if (!(n > 0.0) || !std::isfinite(h.offset)) {
      throw Error(ErrorKind::DegenerateInput, "zero or non-finite halfspace normal");
    }
    hs.push_back({h.normal / n, h.offset / n});
  }

  // Bounded iff the normals positively span the plane: no angular gap of pi or more.
  std::vector<double> angles;
  angles.reserve(hs.size());
  for (const auto& h : hs) angles.push_back(std::atan2(h.normal.y(), h.normal.x()));
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t j = 1; j < angles.size(); ++j) max_gap = std::max(max_gap, angles[j] - angles[j - 1]);
  if (max_gap >= std::numbers::pi - 1e-12) throw Error(ErrorKind::Unbounded, "halfspaces do not bound a region");

  PointList candidates;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      Eigen::Matrix2d m;
      m.row(0) = hs[i].normal.transpose();
      m.row(1) = hs[j].normal.transpose();
      const double det = m.determinant();
      if (std::abs(det) < 1e-14) continue;
      const Point2 p = m.inverse() * Eigen::Vector2d(hs[i].offset, hs[j].offset);
      const double tol = kGeomTol * std::max(1.0, p.lpNorm<Eigen::Infinity>());
      const bool feasible = std::all_of(hs.begin(), hs.end(), [&](const Halfspace& h) {
        return h.signed_distance(p) <= tol;
      });
      if (feasible) candidates.push_back(p);
    }
  }
  try {
    return convex_hull(candidates);
  } catch (const Error&) {
    throw Error(ErrorKind::Empty, "halfspaces enclose no interior");
  }
}

Polytope2 Polytope2::from_vertices(std::span<const Point2> points) {
  PointList hull = convex_hull(points);
  HalfspaceList hs = vertices_to_halfspaces(hull);
  return Polytope2(std::move(hull), std::move(hs));
}

Polytope2 Polytope2::from_halfspaces(std::span<const Halfspace> halfspaces) {
  const PointList v = halfspaces_to_vertices(halfspaces);
  return from_vertices(v);
}

Polytope2 Polytope2::box(double x_lo, double x_hi, double y_lo, double y_hi) {
  const PointList v{{x_lo, y_lo}, {x_hi, y_lo}, {x_hi, y_hi}, {x_lo, y_hi}};
  return from_vertices(v);
}

double Polytope2::area() const { return polygon_area(vertices_); }

Point2 Polytope2::vertex_centroid() const {
  Point2 c = Point2::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

std::array<Point2, 2> Polytope2::bounding_box() const {
  Point2 lo = vertices_.front();
  Point2 hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

bool contains(const Polytope2& poly, const Point2& p, double tol) {
  for (const auto& h : poly.halfspaces()) {
    if (h.signed_distance(p) > tol) return false;
  }
  return true;
}

bool interior_contains(const Polytope2& poly, const Point2& p, double tol) {
  for (const auto& h : poly.halfspaces()) {
    if (h.signed_distance(p) >= -tol) return false;
  }
  return true;
}

Polytope2 intersect(const Polytope2& p, const Polytope2& q) {
  // Containment short-circuits keep nested inputs bit-identical.
  if (all_inside(p, q.vertices(), 0.0)) return q;
  if (all_inside(q, p.vertices(), 0.0)) return p;

  HalfspaceList all(p.halfspaces().begin(), p.halfspaces().end());
  all.insert(all.end(), q.halfspaces().begin(), q.halfspaces().end());
  const PointList v = halfspaces_to_vertices(all);
  if (polygon_area(v) <= kAreaTol) throw Error(ErrorKind::Empty, "intersection has no interior");
  return Polytope2::from_vertices(v);
}

NestedFamily::NestedFamily(std::vector<Polytope2> sets) : sets_(std::move(sets)) {
  if (sets_.empty()) throw Error(ErrorKind::DegenerateInput, "nested family needs at least one set");
  for (std::size_t i = 0; i + 1 < sets_.size(); ++i) {
    if (!all_inside(sets_[i + 1], sets_[i].vertices(), kGeomTol)) {
      throw Error(ErrorKind::NotNested, "Y_" + std::to_string(i + 1) + " is not contained in Y_" +
                                            std::to_string(i + 2));
    }
    const double gap = boundary_min_distance(sets_[i], sets_[i + 1]);
    if (gap < kSepTol) {
      throw Error(ErrorKind::BoundaryOverlap, "boundaries of Y_" + std::to_string(i + 1) + " and Y_" +
                                                  std::to_string(i + 2) + " are closer than 1e-6");
    }
  }
}

NestedFamily nested_from_prioritized(std::span<const Polytope2> prioritized) {
  if (prioritized.empty()) throw Error(ErrorKind::DegenerateInput, "no prioritized sets");
  const std::size_t m = prioritized.size();
  std::vector<Polytope2> running;
  running.reserve(m);
  running.push_back(prioritized[0]);
  for (std::size_t j = 1; j < m; ++j) running.push_back(intersect(running.back(), prioritized[j]));
  // running[j] = Z_1 ∩ ... ∩ Z_{j+1} = Y_{m-j}
  std::reverse(running.begin(), running.end());
  return NestedFamily(std::move(running));
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double boundary_min_distance(const Polytope2& inner, const Polytope2& outer) {
  if (!all_inside(outer, inner.vertices(), kGeomTol)) {
    throw Error(ErrorKind::NotNested, "inner polytope is not contained in outer");
  }
  auto one_way = [](const PointList& from, const PointList& edges) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : from) {
      for (std::size_t j = 0; j < edges.size(); ++j) {
        best = std::min(best, point_segment_distance(p, edges[j], edges[(j + 1) % edges.size()]));
      }
    }
    return best;
  };
  return std::min(one_way(inner.vertices(), outer.vertices()), one_way(outer.vertices(), inner.vertices()));
}

double boundary_max_distance(const Polytope2& p, const Polytope2& q) {
  double best = 0.0;
  for (const auto& v : p.vertices()) {
    for (const auto& w : q.vertices()) best = std::max(best, (v - w).norm());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Delaunay (Bowyer-Watson)

namespace {

struct WorkTri {
  std::array<std::size_t, 3> v;  // counter-clockwise
};

// > 0 iff d lies strictly inside the circumcircle of the counter-clockwise triangle abc.
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

std::pair<Point2, double> circumcircle(const Point2& a, const Point2& b, const Point2& c) {
  const double d = 2.0 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
  const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
  const Point2 center((a2 * (b.y() - c.y()) + b2 * (c.y() - a.y()) + c2 * (a.y() - b.y())) / d,
                      (a2 * (c.x() - b.x()) + b2 * (a.x() - c.x()) + c2 * (b.x() - a.x())) / d);
  return {center, (a - center).norm()};
}

std::vector<WorkTri> bowyer_watson(const PointList& pts, double super_scale) {
  const std::size_t n = pts.size();
  PointList all = pts;
  // Points are pre-normalised into [-0.5, 0.5]^2, so the bounding box has unit size.
  const double d = super_scale;
  all.emplace_back(-2.0 * d, -d);
  all.emplace_back(2.0 * d, -d);
  all.emplace_back(0.0, 2.0 * d);

  std::vector<WorkTri> tris{{{n, n + 1, n + 2}}};
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<WorkTri> keep;
    std::vector<std::array<std::size_t, 2>> boundary;
    std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
    std::vector<WorkTri> bad;
    for (const auto& t : tris) {
      if (incircle(all[t.v[0]], all[t.v[1]], all[t.v[2]], all[p]) > kCircTol * 1e-3) {
        bad.push_back(t);
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& t : bad) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = t.v[e], b = t.v[(e + 1) % 3];
        ++edge_count[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& t : bad) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = t.v[e], b = t.v[(e + 1) % 3];
        if (edge_count[{std::min(a, b), std::max(a, b)}] == 1) boundary.push_back({a, b});
      }
    }
    for (const auto& [a, b] : boundary) {
      WorkTri t{{a, b, p}};
      if (orient(all[a], all[b], all[p]) < 0.0) std::swap(t.v[0], t.v[1]);
      keep.push_back(t);
    }
    tris = std::move(keep);
  }
  std::erase_if(tris, [n](const WorkTri& t) { return t.v[0] >= n || t.v[1] >= n || t.v[2] >= n; });
  return tris;
}

// Resolve cocircular quadrilaterals toward the diagonal incident to the lowest point index.
void canonicalise_cocircular(const PointList& pts, std::vector<WorkTri>& tris) {
  bool flipped = true;
  while (flipped) {
    flipped = false;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> edge_tris;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = tris[t].v[e], b = tris[t].v[(e + 1) % 3];
        edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
      }
    }
    for (const auto& [edge, owners] : edge_tris) {
      if (owners.size() != 2) continue;
      const auto [a, b] = edge;
      auto opposite = [&](std::size_t t) {
        for (auto v : tris[t].v) {
          if (v != a && v != b) return v;
        }
        return a;
      };
      const std::size_t c = opposite(owners[0]);
      const std::size_t d = opposite(owners[1]);
      if (std::min(c, d) >= std::min(a, b)) continue;
      const auto& t0 = tris[owners[0]].v;
      if (std::abs(incircle(pts[t0[0]], pts[t0[1]], pts[t0[2]], pts[d])) > kCircTol * 1e-3) continue;
      // The new diagonal c-d must separate a and b for the quadrilateral to be convex.
      const double sa = orient(pts[c], pts[d], pts[a]);
      const double sb = orient(pts[c], pts[d], pts[b]);
      if (!(sa * sb < 0.0)) continue;
      WorkTri n0{{c, d, a}}, n1{{d, c, b}};
      if (orient(pts[c], pts[d], pts[a]) < 0.0) std::swap(n0.v[0], n0.v[1]);
      if (orient(pts[d], pts[c], pts[b]) < 0.0) std::swap(n1.v[0], n1.v[1]);
      tris[owners[0]] = n0;
      tris[owners[1]] = n1;
      flipped = true;
      break;
    }
  }
}

}  // namespace

std::vector<Triangle> delaunay_triangulate(std::span<const Point2> points) {
  if (points.size() < 3) throw Error(ErrorKind::DegenerateInput, "need at least 3 points");
  const PointList hull = convex_hull(points);
  {
    PointList sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorKind::DegenerateInput, "duplicate points");
    }
  }

  Point2 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point2 center = 0.5 * (lo + hi);
  const double size = (hi - lo).maxCoeff();
  PointList unit;
  unit.reserve(points.size());
  for (const auto& p : points) unit.push_back((p - center) / size);

  const double hull_area = polygon_area(hull) / (size * size);
  std::vector<WorkTri> tris;
  // A super-triangle 10x the bounding box normally suffices; thin hull triangles can
  // still be lost to it, which shows up as missing area and triggers a larger retry.
  for (double scale = 10.0; scale <= 1e7; scale *= 10.0) {
    tris = bowyer_watson(unit, scale);
    double covered = 0.0;
    for (const auto& t : tris) covered += 0.5 * orient(unit[t.v[0]], unit[t.v[1]], unit[t.v[2]]);
    if (std::abs(covered - hull_area) <= 1e-9 * std::max(1.0, hull_area)) break;
  }
  canonicalise_cocircular(unit, tris);

  std::vector<Triangle> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    const Point2& a = points[t.v[0]];
    const Point2& b = points[t.v[1]];
    const Point2& c = points[t.v[2]];
    if (0.5 * orient(a, b, c) <= kAreaTol) continue;
    Triangle tri;
    tri.idx = t.v;
    std::tie(tri.circumcenter, tri.circumradius) = circumcircle(a, b, c);
    out.push_back(tri);
  }
  std::sort(out.begin(), out.end(), [](const Triangle& x, const Triangle& y) {
    auto kx = x.idx, ky = y.idx;
    std::sort(kx.begin(), kx.end());
    std::sort(ky.begin(), ky.end());
    return kx < ky;
  });
  return out;
}

}  // namespace blameless
