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

#ifndef BLAMELESS_OBJECTIVE_HPP
#define BLAMELESS_OBJECTIVE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "blameless/geometry2d.hpp"

namespace blameless {

inline constexpr double kValTol = 1e-8;

/// Value comparisons scale with the magnitude of g once it exceeds 1.
inline double value_tolerance(double g) { return kValTol * std::max(1.0, std::abs(g)); }

/// alpha . x + beta over one annulus triangle.
struct AffinePiece {
  Eigen::Vector2d alpha = Eigen::Vector2d::Zero();
  double beta = 0.0;
  std::array<Point2, 3> triangle{Point2::Zero(), Point2::Zero(), Point2::Zero()};
  /// 1-based: the piece lives in Y_{annulus+1} minus the interior of Y_annulus.
  std::size_t annulus = 0;

  double operator()(const Point2& x) const { return alpha.dot(x) + beta; }
};

/// Convex piecewise-affine function whose sublevel sets at `level_values`
/// reproduce the nested family. Canonical form is the pointwise maximum of
/// the pieces, floored at g_0.
class PiecewiseAffineObjective {
 public:
  PiecewiseAffineObjective(NestedFamily family, std::vector<double> level_values,
                           std::vector<AffinePiece> pieces);

  const NestedFamily& family() const { return family_; }
  const Polytope2& base_region() const { return family_.level(1); }
  double base_value() const { return level_values_.front(); }
  const std::vector<double>& level_values() const { return level_values_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  /// Mutable access for fault-injection tests.
  std::vector<AffinePiece>& mutable_pieces() { return pieces_; }

 private:
  NestedFamily family_;
  std::vector<double> level_values_;
  std::vector<AffinePiece> pieces_;
};

/// g on dY_1, dY_2, ..., dY_m. Requires m >= 2 and g1 > g0.
std::vector<double> assign_boundary_values(const NestedFamily& family, double g0 = 0.0, double g1 = 1.0);

PiecewiseAffineObjective generate_objective(const NestedFamily& family, double g0 = 0.0, double g1 = 1.0);

/// Max-form value; defined on all of R^2.
double evaluate(const PiecewiseAffineObjective& obj, const Point2& x);

/// Region-wise value (base region or first containing triangle). Throws
/// OutsideDomain outside Y_m.
double evaluate_interpolant(const PiecewiseAffineObjective& obj, const Point2& x);

struct ValidationReport {
  double max_vertex_error = 0.0;
  std::size_t monotonicity_violations = 0;
  std::size_t monotonicity_pairs = 0;
  std::size_t convexity_violations = 0;
  std::size_t convexity_triples = 0;
  bool passed = false;
};

struct ValidationOptions {
  std::size_t pairs_per_level = 10000;
  std::size_t convexity_triples = 10000;
  std::uint64_t seed = 0;
};

/// Largest |evaluate(v) - level| over every vertex of every set.
double vertex_agreement_error(const PiecewiseAffineObjective& obj);

/// Like vertex_agreement_error, divided by max(1, |level value|).
double scaled_vertex_error(const PiecewiseAffineObjective& obj);
ValidationReport validate_objective(const PiecewiseAffineObjective& obj, const ValidationOptions& opts = {});

}  // namespace blameless

#endif  // BLAMELESS_OBJECTIVE_HPP
