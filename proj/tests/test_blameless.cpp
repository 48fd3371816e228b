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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

using namespace blameless;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// x_1 = (u, 0), u in [0, 1]
OcpInstance one_step() {
  OcpInstance inst;
  inst.dynamics.A = MatrixXd::Zero(2, 2);
  inst.dynamics.B = (MatrixXd(2, 1) << 1, 0).finished();
  inst.dynamics.c = VectorXd::Zero(2);
  inst.dynamics.dt = 1.0;
  inst.x0 = VectorXd::Zero(2);
  inst.horizon = 1;
  inst.box.lower = VectorXd::Constant(1, 0.0);
  inst.box.upper = VectorXd::Constant(1, 1.0);
  inst.selector.rows = {0, 1};
  inst.weights.R = MatrixXd::Identity(1, 1);
  inst.weights.Q = Eigen::Matrix2d::Identity();
  return inst;
}

NestedFamily one_step_family() {
  return NestedFamily({Polytope2::box(2, 3, -1, 1), Polytope2::box(0.5, 3.2, -2, 2)});
}

double max_abs(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("blameless") {

TEST_CASE("mission cost by hand") {
  Trajectory t;
  t.states = MatrixXd::Zero(3, 2);
  t.inputs = MatrixXd::Zero(2, 2);
  t.dt = 1.0;
  CostWeights w;
  w.R = MatrixXd::Identity(2, 2);
  w.center = Point2::Zero();
  CHECK(mission_cost(t, w, TerminalSelector{{0, 1}}) == 0.0);
  t.inputs << 1, 0, 0, 1;
  CHECK(mission_cost(t, w, TerminalSelector{{0, 1}}) == doctest::Approx(2.0));
  // terminal term counted once per step
  t.states.row(2) << 1, 0;
  CHECK(mission_cost(t, w, TerminalSelector{{0, 1}}) == doctest::Approx(4.0));
}

TEST_CASE("one-step instance needs the looser set") {
  const auto inst = one_step();
  const auto fam = one_step_family();
  const auto brute = brute_force_solve(inst, fam);
  REQUIRE(brute.i_star.has_value());
  CHECK(*brute.i_star == 2);
  CHECK(brute.subproblem_count == 2);
  // centre of Y_2 is (1.85, 0): minimise u^2 + (u - 1.85)^2
  CHECK(brute.trajectory.inputs(0, 0) == doctest::Approx(0.925).epsilon(1e-8));

  const auto obj = generate_objective(fam);
  const auto two = two_stage_solve(inst, obj);
  REQUIRE(two.i_star.has_value());
  CHECK(*two.i_star == 2);
  CHECK(two.subproblem_count == 2);
  CHECK(two.trajectory.inputs(0, 0) == doctest::Approx(0.925).epsilon(1e-8));

  const auto s2 = stage2_optimize(inst, fam, 2);
  CHECK(s2.report.status == SolveStatus::Optimal);
  CHECK(s2.trajectory.inputs(0, 0) == doctest::Approx(0.925).epsilon(1e-8));
}

TEST_CASE("first set reachable means one subproblem") {
  auto inst = one_step();
  const NestedFamily fam({Polytope2::box(0.2, 0.6, -1, 1), Polytope2::box(0, 3, -2, 2)});
  const auto brute = brute_force_solve(inst, fam);
  REQUIRE(brute.i_star.has_value());
  CHECK(*brute.i_star == 1);
  CHECK(brute.subproblem_count == 1);
  // unconstrained optimum u = 0.2 sits inside Y_1, so stage 2 matches the free QP
  auto w = inst.weights;
  w.center = fam.level(1).vertex_centroid();
  const auto free = pure_optimal_solve(inst, w);
  CHECK(max_abs(free.inputs, brute.trajectory.inputs) <= 1e-8);

  const auto two = two_stage_solve(inst, generate_objective(fam));
  REQUIRE(two.i_star.has_value());
  CHECK(*two.i_star == 1);
  CHECK(max_abs(two.trajectory.inputs, brute.trajectory.inputs) <= 1e-6);
}

TEST_CASE("single set") {
  const auto inst = one_step();
  const NestedFamily fam({Polytope2::box(0, 3, -1, 1)});
  const auto s1 = stage1_select(inst, generate_objective(fam));
  CHECK(s1.i_star == 1);
}

TEST_CASE("unreachable family") {
  const auto inst = one_step();
  const NestedFamily fam({Polytope2::box(2, 3, -1, 1), Polytope2::box(1.5, 4, -2, 2)});
  const auto brute = brute_force_solve(inst, fam);
  CHECK_FALSE(brute.i_star.has_value());
  CHECK(brute.subproblem_count == 2);
  try {
    two_stage_solve(inst, generate_objective(fam));
    FAIL("expected NoBlamelessSolution");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBlamelessSolution);
  }
}

TEST_CASE("smallest containing set") {
  const NestedFamily fam(oracle::lander_sets());
  CHECK(smallest_containing(fam, {0, 0}) == 1u);
  CHECK(smallest_containing(fam, {3, 0}) == 2u);
  CHECK(smallest_containing(fam, {0.5 + 1e-7, 0}) == 1u);
  CHECK_FALSE(smallest_containing(fam, {100, 0}).has_value());
}

TEST_CASE("random instances agree with brute force") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto ri = oracle::random_box_instance(seed, 2 + static_cast<int>(seed % 7));
    const NestedFamily fam(ri.sets);
    const auto brute = brute_force_solve(ri.instance, fam);
    const auto two = two_stage_solve(ri.instance, generate_objective(fam));
    REQUIRE(brute.i_star.has_value());
    REQUIRE(two.i_star.has_value());
    CHECK(*two.i_star == *brute.i_star);
    CHECK(std::abs(two.mission_cost - brute.mission_cost) <= 1e-6 * (1 + std::abs(brute.mission_cost)));
    CHECK(max_abs(two.trajectory.states, brute.trajectory.states) <= 1e-6);
    CHECK(two.subproblem_count == 2);
    CHECK(brute.subproblem_count == static_cast<int>(*brute.i_star));
    for (const auto& r : two.reports) CHECK(r.residuals.max() <= kKktTol);

    const auto verdict = classify_blameworthiness(two.trajectory.inputs, ri.instance, fam);
    CHECK_FALSE(verdict.blameworthy);
  }
}

TEST_CASE("engineered priority index") {
  for (int i_star = 3; i_star <= 8; ++i_star) {
    const auto ri = oracle::engineered_instance(100 + i_star, i_star);
    const NestedFamily fam(ri.sets);
    const auto brute = brute_force_solve(ri.instance, fam);
    REQUIRE(brute.i_star.has_value());
    CHECK(*brute.i_star == static_cast<std::size_t>(i_star));
    CHECK(brute.subproblem_count >= 2);
  }
}

TEST_CASE("lander two-stage equals brute force") {
  const auto inst = oracle::lander_instance();
  const NestedFamily fam(oracle::lander_sets());
  const auto obj = generate_objective(fam);
  const auto two = two_stage_solve(inst, obj);
  const auto brute = brute_force_solve(inst, fam);
  REQUIRE(two.i_star.has_value());
  REQUIRE(brute.i_star.has_value());
  CHECK(*two.i_star == *brute.i_star);
  CHECK(max_abs(two.trajectory.states, brute.trajectory.states) <= 1e-6);

  auto w = inst.weights;
  w.center = fam.level(*two.i_star).vertex_centroid();
  const double resum = oracle::mission_cost_resum(two.trajectory.states, two.trajectory.inputs, w.R, w.Q,
                                                  w.center, 0, 2);
  CHECK(std::abs(two.mission_cost - resum) <= 1e-10 * std::max(1.0, resum));

  const Point2 xN = inst.selector.apply(two.trajectory.terminal());
  CHECK(contains(fam.level(*two.i_star), xN, kFeasTol));
  CHECK(std::abs(two.trajectory.terminal()(3)) <= 1e-6);
  CHECK(std::abs(two.trajectory.terminal()(1)) <= 1e-6);
  CHECK(trajectory_residuals(two.trajectory, inst.dynamics, inst.box).box <= 1e-9);
  CHECK_FALSE(classify_blameworthiness(two.trajectory.inputs, inst, fam).blameworthy);
}

TEST_CASE("stage-one point beats sampled successors") {
  const auto inst = oracle::lander_instance();
  const NestedFamily fam(oracle::lander_sets());
  const auto obj = generate_objective(fam);
  const auto s1 = stage1_select(inst, obj);
  CHECK(contains(fam.level(s1.i_star), s1.terminal, kFeasTol));
  CHECK(s1.threshold_consistent);
  const auto pts = sample_successor(inst.dynamics, inst.x0, inst.box, inst.horizon, inst.selector, 10000, 9);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) lowest = std::min(lowest, evaluate(obj, p));
  CHECK(lowest >= s1.value - 1e-6);
}

TEST_CASE("pure optimal moves toward the centre as Q grows") {
  auto inst = oracle::lander_instance();
  const NestedFamily fam(oracle::lander_sets());
  CostWeights w = inst.weights;
  w.center = fam.level(1).vertex_centroid();
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
    w.Q = q * Eigen::Matrix2d::Identity();
    SolveReport rep;
    const auto traj = pure_optimal_solve(inst, w, &rep);
    CHECK(rep.status == SolveStatus::Optimal);
    const double dist = (inst.selector.apply(traj.terminal()) - w.center).norm();
    CHECK(dist <= prev + 1e-9);
    prev = dist;
  }
}

TEST_CASE("drifting lander is blameworthy") {
  const auto inst = oracle::lander_instance();
  const NestedFamily fam(oracle::lander_sets());
  MatrixXd u = MatrixXd::Zero(inst.horizon, 2);
  u.col(1).setConstant(9.81);
  const auto v = classify_blameworthiness(u, inst, fam);
  CHECK(v.blameworthy);
  CHECK_FALSE(v.i_achieved.has_value());
  CHECK(v.i_star_oracle.has_value());
}

TEST_CASE("instance validation") {
  auto inst = one_step();
  inst.x0 = VectorXd::Zero(3);
  CHECK_THROWS_AS(inst.validate(), Error);
}

}  // TEST_SUITE
