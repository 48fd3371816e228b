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

#ifndef BLAMELESS_OCP_HPP
#define BLAMELESS_OCP_HPP

#include <algorithm>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "blameless/dynamics.hpp"
#include "blameless/objective.hpp"

namespace blameless {

inline constexpr double kKktTol = 1e-8;
inline constexpr double kFeasTol = 1e-6;
inline constexpr double kLpRegularization = 1e-8;

/// min 1/2 z'Hz + f'z + constant  s.t.  G z <= h,  A_eq z = b_eq.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  double constant = 0.0;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;

  /// Empty constraint blocks sized for `dim` variables.
  static QpProblem unconstrained(const Eigen::MatrixXd& H, const Eigen::VectorXd& f, double constant = 0.0);
  Eigen::Index dim() const { return H.rows(); }
  double value(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + f.dot(z) + constant; }
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations };

constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

struct KktResiduals {
  double stationarity = 0.0;     // |Hz + f + G'lambda + A'nu|_inf, plus any negative lambda
  double primal = 0.0;           // worst of max(Gz - h, 0) and |Az - b|
  double complementarity = 0.0;  // |lambda .* (h - Gz)|_inf

  double max() const { return std::max({stationarity, primal, complementarity}); }
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd z;
  double objective = 0.0;
  Eigen::VectorXd duals_ineq;
  Eigen::VectorXd duals_eq;
  KktResiduals residuals;
  int iterations = 0;
  /// Phase-1 max constraint violation; the infeasibility certificate when > kFeasTol.
  double infeasibility = 0.0;
};

struct SolverOptions {
  double kkt_tol = kKktTol;
  double feas_tol = kFeasTol;
  int max_iterations = 200;
  bool check_feasibility = true;
};

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& duals_ineq,
                           const Eigen::VectorXd& duals_eq);

/// Primal-dual interior point (Mehrotra predictor-corrector) followed by an
/// active-set polish of the final iterate. Requires H positive semidefinite.
SolveReport solve_qp(const QpProblem& p, const SolverOptions& opts = {});

struct Phase1Result {
  bool feasible = false;
  bool converged = false;
  double violation = 0.0;
  Eigen::VectorXd z;
};

/// Minimises the largest violation of G z <= h and A z = b (box held hard,
/// tiled across z when given per-input bounds).
Phase1Result phase1_feasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, const Eigen::MatrixXd& A_eq,
                             const Eigen::VectorXd& b_eq, const std::optional<InputBox>& box = std::nullopt,
                             const SolverOptions& opts = {});

/// Inequalities lower <= z <= upper with the per-input box tiled over `dim`.
void append_box_rows(const InputBox& box, Eigen::Index dim, Eigen::MatrixXd& G, Eigen::VectorXd& h);

struct EpigraphResult {
  SolveReport report;
  Eigen::VectorXd u;  // stacked inputs
  double value = 0.0; // epigraph variable t at the optimum
  Point2 terminal = Point2::Zero();
};

/// min t  s.t.  t >= alpha_r' E x_N + beta_r,  t >= g0,  u in box, A_eq u = b_eq,
/// solved as a rho-regularised QP over (u, t).
EpigraphResult solve_lp_epigraph(std::span<const AffinePiece> pieces, const CondensedMap& map,
                                 const Eigen::VectorXd& x0, const InputBox& box, double g0,
                                 const Eigen::MatrixXd& A_eq = {}, const Eigen::VectorXd& b_eq = {},
                                 double rho = kLpRegularization, const SolverOptions& opts = {});

}  // namespace blameless

#endif  // BLAMELESS_OCP_HPP
