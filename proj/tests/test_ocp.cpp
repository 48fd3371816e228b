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
#include <numeric>

#include "oracles.hpp"

using namespace blameless;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd mat1(double v) { return MatrixXd::Constant(1, 1, v); }
VectorXd vec1(double v) { return VectorXd::Constant(1, v); }

void check_kkt(const SolveReport& r) {
  if (r.status == SolveStatus::Optimal) CHECK(r.residuals.max() <= kKktTol);
}

// x-channel double integrator (v, r) with a in [-amax, amax].
DiscreteAffineDynamics x_channel(double dt) {
  DiscreteAffineDynamics d;
  d.dt = dt;
  d.A = (MatrixXd(2, 2) << 1, 0, dt, 1).finished();
  d.B = (MatrixXd(2, 1) << dt, dt * dt / 2).finished();
  d.c = VectorXd::Zero(2);
  return d;
}

void terminal_set_rows(const Polytope2& Y, const CondensedMap& map, const VectorXd& x0, MatrixXd& G, VectorXd& h) {
  const auto& hs = Y.halfspaces();
  G.resize(static_cast<Eigen::Index>(hs.size()), map.selected_Gamma.cols());
  h.resize(static_cast<Eigen::Index>(hs.size()));
  const Point2 off = map.selected_offset(x0);
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    G.row(r) = hs[j].normal.transpose() * map.selected_Gamma;
    h(r) = hs[j].offset - hs[j].normal.dot(off);
  }
}

}  // namespace

TEST_SUITE("ocp") {

TEST_CASE("unconstrained quadratic") {
  const auto r = solve_qp(QpProblem::unconstrained(mat1(2.0), vec1(0.0)));
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.z(0)) <= 1e-10);
  CHECK(std::abs(r.objective) <= 1e-12);
  check_kkt(r);
}

TEST_CASE("single active bound") {
  // (z - 3)^2 = z^2 - 6 z + 9
  auto p = QpProblem::unconstrained(mat1(2.0), vec1(-6.0), 9.0);
  p.G = mat1(1.0);
  p.h = vec1(1.0);
  const auto r = solve_qp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.z(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(r.duals_ineq(0) == doctest::Approx(4.0).epsilon(1e-8));
  check_kkt(r);
}

TEST_CASE("kkt residuals by hand") {
  auto p = QpProblem::unconstrained(mat1(2.0), vec1(-6.0), 9.0);
  p.G = mat1(1.0);
  p.h = vec1(1.0);
  const auto at_opt = kkt_residuals(p, vec1(1.0), vec1(4.0), VectorXd());
  CHECK(at_opt.stationarity == 0.0);
  CHECK(at_opt.primal == 0.0);
  CHECK(at_opt.complementarity == 0.0);
  const auto off = kkt_residuals(p, vec1(1.1), vec1(4.0), VectorXd());
  CHECK(off.primal == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("random small QPs match active-set enumeration") {
  CounterRng rng(41, 0);
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 6));
    const int m = static_cast<int>(rng.uniform(0, 7));
    const auto qp = oracle::random_small_qp(rng, d, m);
    auto p = QpProblem::unconstrained(qp.H, qp.f);
    p.G = qp.G;
    p.h = qp.h;
    const auto r = solve_qp(p);
    const auto ref = oracle::active_set_value(qp);
    REQUIRE(ref.has_value());
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.objective - *ref) <= 1e-6 * std::max(1.0, std::abs(*ref)));
    check_kkt(r);
    ++compared;
  }
  CHECK(compared == 50);
}

TEST_CASE("row permutation does not change the value") {
  CounterRng rng(42, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto qp = oracle::random_small_qp(rng, 4, 6);
    auto p = QpProblem::unconstrained(qp.H, qp.f);
    p.G = qp.G;
    p.h = qp.h;
    auto q = p;
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[1], perm[4]);
    for (int r = 0; r < 6; ++r) {
      q.G.row(r) = p.G.row(perm[r]);
      q.h(r) = p.h(perm[r]);
    }
    const double a = solve_qp(p).objective;
    const double b = solve_qp(q).objective;
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("equality constrained QP") {
  // min |z|^2 s.t. z1 + z2 = 2
  auto p = QpProblem::unconstrained(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  p.A_eq = MatrixXd::Ones(1, 2);
  p.b_eq = vec1(2.0);
  const auto r = solve_qp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK((r.z - VectorXd::Ones(2)).norm() <= 1e-9);
  check_kkt(r);
}

TEST_CASE("infeasible QP is reported") {
  auto p = QpProblem::unconstrained(mat1(2.0), vec1(0.0));
  p.G = (MatrixXd(2, 1) << 1, -1).finished();
  p.h = (VectorXd(2) << 0, -1).finished();
  const auto r = solve_qp(p);
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK(r.infeasibility > kFeasTol);
}

TEST_CASE("phase one on intervals") {
  const MatrixXd G = (MatrixXd(2, 1) << 1, -1).finished();
  const auto ok = phase1_feasible(G, (VectorXd(2) << 1, 0).finished(), MatrixXd(0, 1), VectorXd(0));
  CHECK(ok.feasible);
  CHECK(ok.violation <= kFeasTol);
  const auto bad = phase1_feasible(G, (VectorXd(2) << 0, -1).finished(), MatrixXd(0, 1), VectorXd(0));
  CHECK_FALSE(bad.feasible);
  CHECK(bad.violation == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(bad.z(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("phase one matches double integrator reachability") {
  const auto sets = oracle::lander_sets();
  const VectorXd x0 = Eigen::Vector2d(-10, -130);
  InputBox box;
  box.lower = vec1(-10);
  box.upper = vec1(10);
  int compared = 0;
  for (int N = 5; N <= 100; N += 5) {
    const auto map = condense_terminal(x_channel(0.2), N, TerminalSelector{{0, 1}});
    for (const auto& Y : sets) {
      const auto bb = Y.bounding_box();
      const double margin = oracle::double_integrator_margin(x0(0), x0(1), 10.0, 0.2, N, bb[0].x(), bb[1].x(),
                                                             bb[0].y(), bb[1].y());
      MatrixXd G;
      VectorXd h;
      terminal_set_rows(Y, map, x0, G, h);
      INFO("N=" << N << " margin=" << margin);
      const auto ph = phase1_feasible(G, h, MatrixXd(0, N), VectorXd(0), box);
      if (std::abs(margin) > 1e-3) {
        CHECK_MESSAGE(ph.feasible == (margin > 0), "N=" << N << " margin=" << margin);
        ++compared;
      }
    }
  }
  CHECK(compared >= 80);
}

TEST_CASE("epigraph LP of |x|") {
  const std::vector<AffinePiece> pieces{{Eigen::Vector2d(1, 0), 0.0}, {Eigen::Vector2d(-1, 0), 0.0}};
  CondensedMap map;
  map.horizon = 1;
  map.Phi = MatrixXd::Zero(2, 1);
  map.Gamma = MatrixXd::Zero(2, 1);
  map.Gamma(0, 0) = 1.0;
  map.omega = VectorXd::Zero(2);
  map.selected_Phi = map.Phi;
  map.selected_Gamma = map.Gamma;
  map.selected_omega.setZero();
  InputBox box;
  box.lower = vec1(-1);
  box.upper = vec1(2);
  const auto r = solve_lp_epigraph(pieces, map, vec1(0.0), box, -1.0);
  REQUIRE(r.report.status == SolveStatus::Optimal);
  CHECK(std::abs(r.value) <= 1e-6);
  CHECK(std::abs(r.u(0)) <= 1e-6);
  check_kkt(r.report);

  const std::vector<AffinePiece> constant{{Eigen::Vector2d(0, 0), 5.0}};
  const auto c = solve_lp_epigraph(constant, map, vec1(0.0), box, 0.0);
  REQUIRE(c.report.status == SolveStatus::Optimal);
  CHECK(c.value == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(box.contains(c.u, 1e-9));
}

TEST_CASE("lander stage-one LP against a ramp grid") {
  const auto obj = generate_objective(NestedFamily(oracle::lander_sets()));
  const auto d = x_channel(0.2);
  const int N = 60;
  const auto map = condense_terminal(d, N, TerminalSelector{{0, 1}});
  const VectorXd x0 = Eigen::Vector2d(-10, -130);
  InputBox box;
  box.lower = vec1(-10);
  box.upper = vec1(10);
  const auto lp = solve_lp_epigraph(obj.pieces(), map, x0, box, obj.base_value());
  REQUIRE(lp.report.status == SolveStatus::Optimal);
  check_kkt(lp.report);

  // a_k = a + b k / (N - 1), both ends inside the box
  auto value = [&](double a, double b) {
    VectorXd u(N);
    for (int k = 0; k < N; ++k) u(k) = a + b * k / (N - 1.0);
    return evaluate(obj, map.selected_Gamma * u + map.selected_offset(x0));
  };
  double best = std::numeric_limits<double>::infinity(), ba = 0, bb = 0;
  auto scan = [&](double a_lo, double a_hi, double e_lo, double e_hi) {
    for (int i = 0; i < 200; ++i) {
      const double a = a_lo + (a_hi - a_lo) * i / 199.0;
      for (int j = 0; j < 200; ++j) {
        const double e = e_lo + (e_hi - e_lo) * j / 199.0;  // end value
        const double v = value(a, e - a);
        if (v < best) best = v, ba = a, bb = e;
      }
    }
  };
  scan(-10, 10, -10, 10);
  const double step = 20.0 / 199.0;
  scan(std::max(-10.0, ba - step), std::min(10.0, ba + step), std::max(-10.0, bb - step), std::min(10.0, bb + step));
  CHECK(lp.value <= best + 1e-6);
  CHECK(best - lp.value <= 1e-2);
  CHECK(std::abs(evaluate(obj, lp.terminal) - lp.value) <= 1e-6);
}

TEST_CASE("halving the regularisation barely moves the LP value") {
  const auto obj = generate_objective(NestedFamily(oracle::lander_sets()));
  const auto inst = oracle::lander_instance(0.2, 20);
  const auto map = condense_terminal(inst.dynamics, inst.horizon, inst.selector);
  const auto a = solve_lp_epigraph(obj.pieces(), map, inst.x0, inst.box, 0.0, {}, {}, kLpRegularization);
  const auto b = solve_lp_epigraph(obj.pieces(), map, inst.x0, inst.box, 0.0, {}, {}, kLpRegularization / 2);
  REQUIRE(a.report.status == SolveStatus::Optimal);
  REQUIRE(b.report.status == SolveStatus::Optimal);
  check_kkt(a.report);
  check_kkt(b.report);
  CHECK(std::abs(a.value - b.value) <= 10 * kLpRegularization * a.u.squaredNorm() + 1e-9);
}

}  // TEST_SUITE
