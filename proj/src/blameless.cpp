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

#include "blameless/blameless.hpp"

#include <string>

namespace blameless {

namespace {

struct EqualityRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

EqualityRows terminal_equality_rows(const OcpInstance& instance, const CondensedMap& map) {
  const Eigen::Index ne = static_cast<Eigen::Index>(instance.terminal_equalities.size());
  EqualityRows rows{Eigen::MatrixXd(ne, map.Gamma.cols()), Eigen::VectorXd(ne)};
  const Eigen::VectorXd free_terminal = map.Phi * instance.x0 + map.omega;
  for (Eigen::Index j = 0; j < ne; ++j) {
    const auto& eq = instance.terminal_equalities[j];
    rows.A.row(j) = map.Gamma.row(eq.state);
    rows.b(j) = eq.value - free_terminal(eq.state);
  }
  return rows;
}

// A_set (offset + E Gamma u) <= b_set, then the input box.
void terminal_set_rows(const Polytope2& set, const CondensedMap& map, const Eigen::Vector2d& offset,
                       Eigen::MatrixXd& G, Eigen::VectorXd& h) {
  const auto& hs = set.halfspaces();
  const Eigen::Index rows = static_cast<Eigen::Index>(hs.size());
  G.resize(rows, map.Gamma.cols());
  h.resize(rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    G.row(j) = hs[j].normal.transpose() * map.selected_Gamma;
    h(j) = hs[j].offset - hs[j].normal.dot(offset);
  }
}

Trajectory trajectory_from(const OcpInstance& instance, const Eigen::VectorXd& u) {
  return rollout(instance.dynamics, instance.x0, unstack_inputs(u, instance.dynamics.inputs()));
}

}  // namespace

void OcpInstance::validate() const {
  const Eigen::Index n = dynamics.states();
  const Eigen::Index l = dynamics.inputs();
  if (dynamics.A.cols() != n || dynamics.B.rows() != n || dynamics.c.size() != n || x0.size() != n) {
    throw Error(ErrorKind::ValidationError, "state dimensions are inconsistent");
  }
  if (!x0.allFinite()) throw Error(ErrorKind::ValidationError, "x0 is not finite");
  if (horizon < 1) throw Error(ErrorKind::ValidationError, "horizon must be at least 1");
  box.validate();
  if (box.lower.size() != l) throw Error(ErrorKind::ValidationError, "input box size differs from input count");
  for (auto r : selector.rows) {
    if (r < 0 || r >= n) throw Error(ErrorKind::ValidationError, "selector row out of range");
  }
  if (selector.rows[0] == selector.rows[1]) throw Error(ErrorKind::ValidationError, "selector rows must differ");
  if (weights.R.rows() != l || weights.R.cols() != l) throw Error(ErrorKind::ValidationError, "R must be l x l");
  for (const auto& eq : terminal_equalities) {
    if (eq.state < 0 || eq.state >= n) throw Error(ErrorKind::ValidationError, "terminal equality state out of range");
  }
}

double mission_cost(const Trajectory& traj, const CostWeights& weights, const TerminalSelector& selector) {
  const Eigen::Index N = traj.horizon();
  const Eigen::Vector2d e = selector.apply(traj.terminal()) - weights.center;
  const double terminal = e.dot(weights.Q * e);
  double total = 0.0;
  for (Eigen::Index k = 0; k < N; ++k) {
    const Eigen::VectorXd u = traj.inputs.row(k).transpose();
    total += u.dot(weights.R * u) + terminal;
  }
  return total;
}

QpProblem mission_qp(const OcpInstance& instance, const CondensedMap& map, const Point2& center,
                     const Polytope2* terminal_set) {
  const Eigen::Index l = instance.dynamics.inputs();
  const Eigen::Index N = instance.horizon;
  const Eigen::Index d = N * l;
  const double n_terms = static_cast<double>(N);
  const Eigen::Vector2d offset = map.selected_offset(instance.x0);
  const Eigen::Vector2d e0 = offset - center;
  const Eigen::MatrixXd& EG = map.selected_Gamma;

  QpProblem q;
  q.H = 2.0 * n_terms * EG.transpose() * instance.weights.Q * EG;
  for (Eigen::Index k = 0; k < N; ++k) q.H.block(k * l, k * l, l, l) += 2.0 * instance.weights.R;
  q.H = 0.5 * (q.H + q.H.transpose()).eval();
  q.f = 2.0 * n_terms * EG.transpose() * (instance.weights.Q * e0);
  q.constant = n_terms * e0.dot(instance.weights.Q * e0);

  q.G.resize(0, d);
  q.h.resize(0);
  if (terminal_set != nullptr) terminal_set_rows(*terminal_set, map, offset, q.G, q.h);
  append_box_rows(instance.box, d, q.G, q.h);

  const EqualityRows eq = terminal_equality_rows(instance, map);
  q.A_eq = eq.A;
  q.b_eq = eq.b;
  return q;
}

std::optional<std::size_t> smallest_containing(const NestedFamily& family, const Point2& p, double tol) {
  for (std::size_t i = 1; i <= family.size(); ++i) {
    if (contains(family.level(i), p, tol)) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> feasible_priority_index(const OcpInstance& instance, const NestedFamily& family,
                                                   int* tests) {
  instance.validate();
  const CondensedMap map = condense_terminal(instance.dynamics, instance.horizon, instance.selector);
  const Eigen::Vector2d offset = map.selected_offset(instance.x0);
  const EqualityRows eq = terminal_equality_rows(instance, map);
  if (tests != nullptr) *tests = 0;
  for (std::size_t i = 1; i <= family.size(); ++i) {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    terminal_set_rows(family.level(i), map, offset, G, h);
    if (tests != nullptr) ++*tests;
    const Phase1Result ph1 = phase1_feasible(G, h, eq.A, eq.b, instance.box);
    if (ph1.feasible) return i;
    if (!ph1.converged) throw Error(ErrorKind::SolverFailure, "phase-1 test for Y_" + std::to_string(i) + " did not converge");
  }
  return std::nullopt;
}

BlamelessSolution brute_force_solve(const OcpInstance& instance, const NestedFamily& family) {
  instance.validate();
  const CondensedMap map = condense_terminal(instance.dynamics, instance.horizon, instance.selector);
  BlamelessSolution sol;
  for (std::size_t i = 1; i <= family.size(); ++i) {
    const Polytope2& set = family.level(i);
    const QpProblem q = mission_qp(instance, map, set.vertex_centroid(), &set);
    SolveReport rep = solve_qp(q);
    ++sol.subproblem_count;
    const SolveStatus status = rep.status;
    sol.reports.push_back(std::move(rep));
    if (status == SolveStatus::Infeasible) continue;
    if (status != SolveStatus::Optimal) {
      throw Error(ErrorKind::SolverFailure, "brute-force subproblem " + std::to_string(i) + " did not converge");
    }
    sol.i_star = i;
    sol.trajectory = trajectory_from(instance, sol.reports.back().z);
    CostWeights w = instance.weights;
    w.center = set.vertex_centroid();
    sol.mission_cost = mission_cost(sol.trajectory, w, instance.selector);
    return sol;
  }
  return sol;
}

Stage1Result stage1_select(const OcpInstance& instance, const PiecewiseAffineObjective& objective) {
  instance.validate();
  const CondensedMap map = condense_terminal(instance.dynamics, instance.horizon, instance.selector);
  const EqualityRows eq = terminal_equality_rows(instance, map);

  Stage1Result out;
  out.lp = solve_lp_epigraph(objective.pieces(), map, instance.x0, instance.box, objective.base_value(), eq.A, eq.b);
  if (out.lp.report.status != SolveStatus::Optimal) {
    throw Error(ErrorKind::SolverFailure, "stage-1 epigraph problem did not converge");
  }
  out.terminal = out.lp.terminal;
  out.value = out.lp.value;
  const auto idx = smallest_containing(objective.family(), out.terminal, kFeasTol);
  if (!idx) throw Error(ErrorKind::NoBlamelessSolution, "stage-1 terminal point lies outside Y_m");
  out.i_star = *idx;
  out.threshold_consistent = out.value <= objective.level_values()[out.i_star - 1] + kFeasTol;
  return out;
}

Stage2Result stage2_optimize(const OcpInstance& instance, const NestedFamily& family, std::size_t i_star) {
  instance.validate();
  if (i_star < 1 || i_star > family.size()) throw Error(ErrorKind::ValidationError, "i_star out of range");
  const CondensedMap map = condense_terminal(instance.dynamics, instance.horizon, instance.selector);
  const Polytope2& set = family.level(i_star);
  const QpProblem q = mission_qp(instance, map, set.vertex_centroid(), &set);

  Stage2Result out;
  out.report = solve_qp(q);
  if (out.report.status == SolveStatus::Infeasible) {
    throw Error(ErrorKind::InfeasibleStage2, "Y_" + std::to_string(i_star) + " infeasible after stage 1 selected it");
  }
  if (out.report.status != SolveStatus::Optimal) {
    throw Error(ErrorKind::SolverFailure, "stage-2 mission problem did not converge");
  }
  out.trajectory = trajectory_from(instance, out.report.z);
  return out;
}

BlamelessSolution two_stage_solve(const OcpInstance& instance, const PiecewiseAffineObjective& objective) {
  const Stage1Result s1 = stage1_select(instance, objective);
  Stage2Result s2 = stage2_optimize(instance, objective.family(), s1.i_star);

  BlamelessSolution sol;
  sol.i_star = s1.i_star;
  sol.stage1_value = s1.value;
  sol.trajectory = std::move(s2.trajectory);
  CostWeights w = instance.weights;
  w.center = objective.family().level(s1.i_star).vertex_centroid();
  sol.mission_cost = mission_cost(sol.trajectory, w, instance.selector);
  sol.reports = {s1.lp.report, std::move(s2.report)};
  sol.subproblem_count = 2;
  return sol;
}

Trajectory pure_optimal_solve(const OcpInstance& instance, const CostWeights& weights, SolveReport* report) {
  OcpInstance inst = instance;
  inst.weights = weights;
  inst.validate();
  const CondensedMap map = condense_terminal(inst.dynamics, inst.horizon, inst.selector);
  const QpProblem q = mission_qp(inst, map, weights.center, nullptr);
  SolveReport rep = solve_qp(q);
  if (rep.status != SolveStatus::Optimal) {
    throw Error(ErrorKind::SolverFailure, std::string("pure-optimal problem: ") + std::string(to_string(rep.status)));
  }
  Trajectory traj = trajectory_from(inst, rep.z);
  if (report != nullptr) *report = std::move(rep);
  return traj;
}

BlameVerdict classify_blameworthiness(const Eigen::MatrixXd& inputs, const OcpInstance& instance,
                                      const NestedFamily& family) {
  BlameVerdict v;
  const Trajectory traj = rollout(instance.dynamics, instance.x0, inputs);
  v.i_achieved = smallest_containing(family, instance.selector.apply(traj.terminal()), kFeasTol);
  v.i_star_oracle = feasible_priority_index(instance, family);
  if (v.i_star_oracle) v.blameworthy = !v.i_achieved || *v.i_achieved > *v.i_star_oracle;
  return v;
}

}  // namespace blameless
