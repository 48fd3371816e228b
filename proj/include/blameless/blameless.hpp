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

#ifndef BLAMELESS_BLAMELESS_HPP
#define BLAMELESS_BLAMELESS_HPP

#include <optional>
#include <vector>

#include "blameless/dynamics.hpp"
#include "blameless/objective.hpp"
#include "blameless/ocp.hpp"

namespace blameless {

/// q = sum_{k=1}^{N} u_{k-1}' R u_{k-1} + (E x_N - c)' Q (E x_N - c).
/// The terminal term is repeated N times, so its effective weight is N Q.
struct CostWeights {
  Eigen::MatrixXd R;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  Point2 center = Point2::Zero();
};

/// x_N[state] = value
struct TerminalEquality {
  Eigen::Index state = 0;
  double value = 0.0;
};

struct OcpInstance {
  DiscreteAffineDynamics dynamics;
  Eigen::VectorXd x0;
  Eigen::Index horizon = 0;
  InputBox box;
  TerminalSelector selector;
  CostWeights weights;
  std::vector<TerminalEquality> terminal_equalities;

  /// Throws ValidationError on inconsistent dimensions.
  void validate() const;
};

struct BlamelessSolution {
  std::optional<std::size_t> i_star;  // 1-based
  Trajectory trajectory;
  double mission_cost = 0.0;
  double stage1_value = 0.0;
  std::vector<SolveReport> reports;
  int subproblem_count = 0;
};

double mission_cost(const Trajectory& traj, const CostWeights& weights, const TerminalSelector& selector);

/// The mission QP over stacked inputs, optionally with E x_N constrained to `terminal_set`.
QpProblem mission_qp(const OcpInstance& instance, const CondensedMap& map, const Point2& center,
                     const Polytope2* terminal_set);

/// Smallest i with p in Y_i (within tol), if any.
std::optional<std::size_t> smallest_containing(const NestedFamily& family, const Point2& p, double tol = kFeasTol);

/// Smallest i whose terminal constraint is feasible, found by phase-1 tests in priority order.
std::optional<std::size_t> feasible_priority_index(const OcpInstance& instance, const NestedFamily& family,
                                                   int* tests = nullptr);

/// Lexicographic baseline: impose Y_1, Y_2, ... until the QP is feasible.
/// i_star is empty when even Y_m is unreachable.
BlamelessSolution brute_force_solve(const OcpInstance& instance, const NestedFamily& family);

struct Stage1Result {
  std::size_t i_star = 0;
  Point2 terminal = Point2::Zero();
  double value = 0.0;
  /// value <= level_values[i_star - 1] + tol; membership decides i_star, this only cross-checks.
  bool threshold_consistent = false;
  EpigraphResult lp;
};

/// Minimises the synthesised objective at the terminal state over the dynamically feasible set.
Stage1Result stage1_select(const OcpInstance& instance, const PiecewiseAffineObjective& objective);

struct Stage2Result {
  Trajectory trajectory;
  SolveReport report;
};

/// Mission QP with E x_N in Y_{i_star}, centred at the vertex centroid of Y_{i_star}.
Stage2Result stage2_optimize(const OcpInstance& instance, const NestedFamily& family, std::size_t i_star);

BlamelessSolution two_stage_solve(const OcpInstance& instance, const PiecewiseAffineObjective& objective);

/// Mission QP with no terminal safety constraint; `weights.center` is used as given.
Trajectory pure_optimal_solve(const OcpInstance& instance, const CostWeights& weights,
                              SolveReport* report = nullptr);

struct BlameVerdict {
  bool blameworthy = false;
  std::optional<std::size_t> i_achieved;
  std::optional<std::size_t> i_star_oracle;
};

BlameVerdict classify_blameworthiness(const Eigen::MatrixXd& inputs, const OcpInstance& instance,
                                      const NestedFamily& family);

}  // namespace blameless

#endif  // BLAMELESS_BLAMELESS_HPP
