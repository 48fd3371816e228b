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

// Classic RK4 on x' = A x + B u + c with u held constant.
VectorXd rk4(const ContinuousAffineDynamics& d, VectorXd x, const VectorXd& u, double dt, int steps) {
  const double h = dt / steps;
  auto f = [&](const VectorXd& z) -> VectorXd { return d.A * z + d.B * u + d.c; };
  for (int s = 0; s < steps; ++s) {
    const VectorXd k1 = f(x);
    const VectorXd k2 = f(x + 0.5 * h * k1);
    const VectorXd k3 = f(x + 0.5 * h * k2);
    const VectorXd k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

VectorXd random_vector(CounterRng& rng, Eigen::Index n, double lo, double hi) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

InputBox lander_box() {
  InputBox box;
  box.lower = Eigen::Vector2d(-10, 9);
  box.upper = Eigen::Vector2d(10, 30);
  return box;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("zoh of the lander x-axis") {
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  CHECK(d.A(0, 0) == doctest::Approx(1.0));
  CHECK(d.A(2, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(d.A(2, 2) == doctest::Approx(1.0));
  CHECK(std::abs(d.A(0, 2)) <= 1e-15);
  CHECK(d.B(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(d.B(2, 0) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(std::abs(d.c(0)) <= 1e-15);
  CHECK(std::abs(d.c(2)) <= 1e-15);
}

TEST_CASE("zoh gravity drift") {
  const auto d = discretize_zoh(lander_dynamics(9.81), 0.2);
  CHECK(d.c(1) == doctest::Approx(-1.962).epsilon(1e-13));
  CHECK(d.c(3) == doctest::Approx(-0.1962).epsilon(1e-13));
}

TEST_CASE("zoh with zero A is the identity map plus input") {
  ContinuousAffineDynamics cont;
  cont.A = MatrixXd::Zero(2, 2);
  cont.B = (MatrixXd(2, 1) << 1.5, -2.0).finished();
  cont.c = Eigen::Vector2d(0.3, 0.7);
  const auto d = discretize_zoh(cont, 1.0);
  CHECK((d.A - MatrixXd::Identity(2, 2)).norm() <= 1e-15);
  CHECK((d.B - cont.B).norm() <= 1e-15);
  CHECK((d.c - cont.c).norm() <= 1e-15);
}

TEST_CASE("zoh matches fine rk4 integration") {
  CounterRng rng(31, 0);
  const auto lander = lander_dynamics();
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd x = random_vector(rng, 4, -20, 20);
    const VectorXd u = random_vector(rng, 2, -10, 30);
    const auto d = discretize_zoh(lander, 0.2);
    CHECK((d.step(x, u) - rk4(lander, x, u, 0.2, 200)).cwiseAbs().maxCoeff() <= 1e-9);
  }
  // a non-nilpotent system too
  ContinuousAffineDynamics cont;
  cont.A = (MatrixXd(2, 2) << -0.5, 1.0, -1.0, -0.2).finished();
  cont.B = (MatrixXd(2, 1) << 0.0, 1.0).finished();
  cont.c = Eigen::Vector2d(0.1, -0.3);
  const auto d = discretize_zoh(cont, 0.2);
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd x = random_vector(rng, 2, -5, 5);
    const VectorXd u = random_vector(rng, 1, -1, 1);
    CHECK((d.step(x, u) - rk4(cont, x, u, 0.2, 200)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("rollout with identity dynamics is constant") {
  DiscreteAffineDynamics d;
  d.A = MatrixXd::Identity(3, 3);
  d.B = MatrixXd::Ones(3, 1);
  d.c = VectorXd::Zero(3);
  d.dt = 0.5;
  const VectorXd x0 = Eigen::Vector3d(1, 2, 3);
  const auto traj = rollout(d, x0, MatrixXd::Zero(7, 1));
  CHECK(traj.states.rows() == 8);
  for (Eigen::Index k = 0; k <= 7; ++k) CHECK((traj.states.row(k).transpose() - x0).norm() == 0.0);
}

TEST_CASE("ballistic drift of the lander") {
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  const VectorXd x0 = (VectorXd(4) << -10, -5, -130, 100).finished();
  MatrixXd u = MatrixXd::Zero(60, 2);
  u.col(1).setConstant(9.81);
  const auto traj = rollout(d, x0, u);
  CHECK(traj.terminal()(0) == doctest::Approx(-10.0).epsilon(1e-12));
  CHECK(traj.terminal()(2) == doctest::Approx(-250.0).epsilon(1e-12));
}

TEST_CASE("condensing for short horizons") {
  CounterRng rng(32, 0);
  DiscreteAffineDynamics d;
  d.A = (MatrixXd(2, 2) << 0.9, 0.1, -0.2, 0.8).finished();
  d.B = (MatrixXd(2, 1) << 0.5, 1.0).finished();
  d.c = Eigen::Vector2d(0.05, -0.1);
  const auto m1 = condense_terminal(d, 1);
  CHECK((m1.Phi - d.A).norm() == 0.0);
  CHECK((m1.Gamma - d.B).norm() == 0.0);
  CHECK((m1.omega - d.c).norm() == 0.0);

  d.A = MatrixXd::Identity(2, 2);
  const auto m2 = condense_terminal(d, 2);
  MatrixXd BB(2, 2);
  BB << d.B, d.B;
  CHECK((m2.Gamma - BB).norm() <= 1e-15);
  CHECK((m2.omega - 2 * d.c).norm() <= 1e-15);
}

TEST_CASE("condensing agrees with rollout") {
  CounterRng rng(33, 0);
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  const auto map = condense_terminal(d, 60, TerminalSelector{{0, 2}});
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd x0 = random_vector(rng, 4, -50, 50);
    MatrixXd u(60, 2);
    for (Eigen::Index k = 0; k < 60; ++k) u.row(k) = random_vector(rng, 2, -10, 30).transpose();
    const auto traj = rollout(d, x0, u);
    const VectorXd pred = map.terminal(x0, stack_inputs(u));
    CHECK((pred - traj.terminal()).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, traj.terminal().norm()));
    const Point2 sel = TerminalSelector{{0, 2}}.apply(traj.terminal());
    CHECK((map.selected_Gamma * stack_inputs(u) + map.selected_offset(x0) - sel).norm() <= 1e-8 * std::max(1.0, sel.norm()));
  }
  MatrixXd u = MatrixXd::Ones(4, 2);
  CHECK((unstack_inputs(stack_inputs(u), 2) - u).norm() == 0.0);
}

TEST_CASE("trajectory residuals") {
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  MatrixXd u = MatrixXd::Zero(10, 2);
  u.col(1).setConstant(10.0);
  auto traj = rollout(d, VectorXd::Zero(4), u);
  auto r = trajectory_residuals(traj, d, lander_box());
  CHECK(r.dynamics <= 1e-12);
  CHECK(r.box <= 0.0);
  traj.inputs(3, 1) = 31.0;
  r = trajectory_residuals(traj, d, lander_box());
  CHECK(r.box == doctest::Approx(1.0));
}

TEST_CASE("input box validation") {
  InputBox box;
  box.lower = Eigen::Vector2d(1, 0);
  box.upper = Eigen::Vector2d(0, 1);
  CHECK_THROWS_AS(box.validate(), Error);
  CHECK_NOTHROW(lander_box().validate());
  CHECK(lander_box().contains(Eigen::Vector2d(0, 10)));
  CHECK_FALSE(lander_box().contains(Eigen::Vector2d(0, 8)));
}

TEST_CASE("degenerate box collapses the sample cloud") {
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  InputBox box;
  box.lower = Eigen::Vector2d(1.0, 12.0);
  box.upper = box.lower;
  const VectorXd x0 = (VectorXd(4) << -10, -5, -130, 100).finished();
  const TerminalSelector sel{{0, 2}};
  const auto pts = sample_successor(d, x0, box, 20, sel, 50, 7);
  MatrixXd u(20, 2);
  u.rowwise() = box.lower.transpose();
  const Point2 ref = sel.apply(rollout(d, x0, u).terminal());
  for (const auto& p : pts) CHECK((p - ref).norm() <= 1e-10);
}

TEST_CASE("sampling is reproducible and thread-invariant") {
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  const VectorXd x0 = (VectorXd(4) << -10, -5, -130, 100).finished();
  const TerminalSelector sel{{0, 2}};
  const auto a = sample_successor(d, x0, lander_box(), 60, sel, 1000, 42, 1);
  const auto b = sample_successor(d, x0, lander_box(), 60, sel, 1000, 42, 4);
  const auto c = sample_successor(d, x0, lander_box(), 60, sel, 1000, 42, 1);
  REQUIRE(a.size() == 1000);
  bool same = true;
  for (std::size_t j = 0; j < a.size(); ++j) same = same && a[j] == b[j] && a[j] == c[j];
  CHECK(same);
  const auto one = sample_successor(d, x0, lander_box(), 60, sel, 1, 42, 3);
  CHECK(one[0] == a[0]);
  const auto other = sample_successor(d, x0, lander_box(), 60, sel, 1, 43, 1);
  CHECK(other[0] != a[0]);
}

TEST_CASE("samples lie inside the exact zonotope") {
  // In the plane a zonotope c + sum r_k [-1,1] g_k has one facet pair per
  // generator direction; the offset is sum_k r_k |n . g_k|.
  const auto d = discretize_zoh(lander_dynamics(), 0.2);
  const VectorXd x0 = (VectorXd(4) << -10, -5, -130, 100).finished();
  const TerminalSelector sel{{0, 2}};
  for (Eigen::Index N = 1; N <= 4; ++N) {
    const auto map = condense_terminal(d, N, sel);
    InputBox box;
    box.lower = VectorXd::Zero(2 * N);
    box.upper = VectorXd::Zero(2 * N);
    for (Eigen::Index k = 0; k < N; ++k) {
      box.lower.segment(2 * k, 2) = lander_box().lower;
      box.upper.segment(2 * k, 2) = lander_box().upper;
    }
    const VectorXd mid = 0.5 * (box.lower + box.upper);
    const VectorXd rad = 0.5 * (box.upper - box.lower);
    const Point2 center = map.selected_Gamma * mid + map.selected_offset(x0);
    std::vector<Point2> normals;
    for (Eigen::Index k = 0; k < map.selected_Gamma.cols(); ++k) {
      const Point2 g = map.selected_Gamma.col(k);
      if (g.norm() > 1e-12) normals.push_back(Point2(-g.y(), g.x()).normalized());
    }
    REQUIRE(!normals.empty());
    const auto pts = sample_successor(d, x0, lander_box(), N, sel, 2000, 5);
    for (const auto& p : pts) {
      for (const auto& n : normals) {
        double off = 0.0;
        for (Eigen::Index k = 0; k < map.selected_Gamma.cols(); ++k)
          off += rad(k) * std::abs(n.dot(map.selected_Gamma.col(k)));
        CHECK(std::abs(n.dot(p - center)) <= off + 1e-9);
      }
    }
  }
}

}  // TEST_SUITE
