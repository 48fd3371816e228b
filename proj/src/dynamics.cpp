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

#include "blameless/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "blameless/random.hpp"

namespace blameless {

void InputBox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorKind::ValidationError, "input box: bound dimensions differ");
  }
  if (!lower.allFinite() || !upper.allFinite() || (lower.array() > upper.array()).any()) {
    throw Error(ErrorKind::ValidationError, "input box: lower bound exceeds upper bound");
  }
}

bool InputBox::contains(const Eigen::VectorXd& u, double tol) const {
  return (u.array() >= lower.array() - tol).all() && (u.array() <= upper.array() + tol).all();
}

Eigen::MatrixXd TerminalSelector::matrix(Eigen::Index n) const {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2, n);
  E(0, rows[0]) = 1.0;
  E(1, rows[1]) = 1.0;
  return E;
}

DiscreteAffineDynamics discretize_zoh(const ContinuousAffineDynamics& cont, double dt) {
  const Eigen::Index n = cont.states();
  const Eigen::Index l = cont.inputs();
  if (!(dt > 0.0)) throw Error(ErrorKind::ValidationError, "dt must be positive");
  if (cont.A.cols() != n || cont.B.rows() != n || cont.c.size() != n) {
    throw Error(ErrorKind::ValidationError, "continuous dynamics dimensions are inconsistent");
  }

  // exp([[A, B, c], [0, 0, 0]] dt) = [[A_d, B_d, c_d], [0, I, 0]] + ...
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + l + 1, n + l + 1);
  aug.topLeftCorner(n, n) = cont.A;
  aug.block(0, n, n, l) = cont.B;
  aug.block(0, n + l, n, 1) = cont.c;
  const Eigen::MatrixXd e = (aug * dt).exp();

  DiscreteAffineDynamics d;
  d.A = e.topLeftCorner(n, n);
  d.B = e.block(0, n, n, l);
  d.c = e.block(0, n + l, n, 1);
  d.dt = dt;

  // Order-2 nilpotent A has the closed form I + A dt; hold the exponential to it.
  if ((cont.A * cont.A).cwiseAbs().maxCoeff() == 0.0) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Ad = I + cont.A * dt;
    const Eigen::MatrixXd Bd = cont.B * dt + cont.A * cont.B * (dt * dt / 2.0);
    const Eigen::VectorXd cd = cont.c * dt + cont.A * cont.c * (dt * dt / 2.0);
    const double resid = std::max({(Ad - d.A).cwiseAbs().maxCoeff(), (Bd - d.B).cwiseAbs().maxCoeff(),
                                   cd.size() ? (cd - d.c).cwiseAbs().maxCoeff() : 0.0});
    if (resid > 1e-9 * std::max(1.0, std::max(Bd.cwiseAbs().maxCoeff(), cd.cwiseAbs().maxCoeff()))) {
      throw Error(ErrorKind::IllConditioned, "zero-order-hold exponential deviates from closed form");
    }
    d.A = Ad;
    d.B = Bd;
    d.c = cd;
  }
  return d;
}

Trajectory rollout(const DiscreteAffineDynamics& dyn, const Eigen::VectorXd& x0, const Eigen::MatrixXd& inputs) {
  if (x0.size() != dyn.states() || inputs.cols() != dyn.inputs()) {
    throw Error(ErrorKind::ValidationError, "rollout dimensions do not match the dynamics");
  }
  const Eigen::Index N = inputs.rows();
  Trajectory traj;
  traj.dt = dyn.dt;
  traj.inputs = inputs;
  traj.states.resize(N + 1, dyn.states());
  traj.states.row(0) = x0.transpose();
  Eigen::VectorXd x = x0;
  for (Eigen::Index k = 0; k < N; ++k) {
    x = dyn.step(x, inputs.row(k).transpose());
    traj.states.row(k + 1) = x.transpose();
  }
  return traj;
}

TrajectoryResiduals trajectory_residuals(const Trajectory& traj, const DiscreteAffineDynamics& dyn,
                                         const InputBox& box) {
  TrajectoryResiduals r;
  r.box = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < traj.horizon(); ++k) {
    const Eigen::VectorXd u = traj.inputs.row(k).transpose();
    const Eigen::VectorXd pred = dyn.step(traj.states.row(k).transpose(), u);
    r.dynamics = std::max(r.dynamics, (traj.states.row(k + 1).transpose() - pred).lpNorm<Eigen::Infinity>());
    r.box = std::max({r.box, (box.lower - u).maxCoeff(), (u - box.upper).maxCoeff()});
  }
  return r;
}

Eigen::VectorXd stack_inputs(const Eigen::MatrixXd& inputs) {
  Eigen::VectorXd u(inputs.size());
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) u.segment(k * inputs.cols(), inputs.cols()) = inputs.row(k).transpose();
  return u;
}

Eigen::MatrixXd unstack_inputs(const Eigen::VectorXd& u, Eigen::Index n_inputs) {
  const Eigen::Index N = u.size() / n_inputs;
  Eigen::MatrixXd inputs(N, n_inputs);
  for (Eigen::Index k = 0; k < N; ++k) inputs.row(k) = u.segment(k * n_inputs, n_inputs).transpose();
  return inputs;
}

CondensedMap condense_terminal(const DiscreteAffineDynamics& dyn, Eigen::Index horizon,
                               const TerminalSelector& selector) {
  if (horizon < 1) throw Error(ErrorKind::ValidationError, "horizon must be at least 1");
  const Eigen::Index n = dyn.states();
  const Eigen::Index l = dyn.inputs();

  CondensedMap map;
  map.horizon = horizon;
  map.Gamma.resize(n, horizon * l);
  map.omega = Eigen::VectorXd::Zero(n);
  // Walk backwards: block k of Gamma is A^{N-1-k} B.
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = horizon - 1; k >= 0; --k) {
    map.Gamma.block(0, k * l, n, l) = power * dyn.B;
    map.omega += power * dyn.c;
    power = power * dyn.A;
  }
  map.Phi = power;

  const Eigen::MatrixXd E = selector.matrix(n);
  map.selected_Gamma = E * map.Gamma;
  map.selected_Phi = E * map.Phi;
  map.selected_omega = E * map.omega;
  return map;
}

PointList sample_successor(const DiscreteAffineDynamics& dyn, const Eigen::VectorXd& x0, const InputBox& box,
                           Eigen::Index horizon, const TerminalSelector& selector, std::size_t samples,
                           std::uint64_t seed, unsigned threads) {
  box.validate();
  if (box.lower.size() != dyn.inputs()) throw Error(ErrorKind::ValidationError, "input box size mismatch");
  const CondensedMap map = condense_terminal(dyn, horizon, selector);
  const Eigen::Vector2d offset = map.selected_offset(x0);
  const Eigen::Index l = dyn.inputs();

  PointList out(samples);
  auto work = [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd u(horizon * l);
    for (std::size_t j = begin; j < end; ++j) {
      CounterRng rng(seed, j);
      for (Eigen::Index k = 0; k < horizon; ++k) {
        for (Eigen::Index c = 0; c < l; ++c) u(k * l + c) = rng.uniform(box.lower(c), box.upper(c));
      }
      out[j] = offset + map.selected_Gamma * u;
    }
  };

  threads = std::max(1u, threads);
  if (threads == 1 || samples < 2) {
    work(0, samples);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(samples, t * chunk);
      const std::size_t end = std::min(samples, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }  // joined here, before `out` is returned
  return out;
}

ContinuousAffineDynamics lander_dynamics(double gravity) {
  ContinuousAffineDynamics cont;
  cont.A = Eigen::MatrixXd::Zero(4, 4);
  cont.A(2, 0) = 1.0;
  cont.A(3, 1) = 1.0;
  cont.B = Eigen::MatrixXd::Zero(4, 2);
  cont.B(0, 0) = 1.0;
  cont.B(1, 1) = 1.0;
  cont.c = Eigen::VectorXd::Zero(4);
  cont.c(1) = -gravity;
  cont.state_labels = {"v_x", "v_y", "p_x", "p_y"};
  cont.input_labels = {"a_x", "a_y"};
  return cont;
}

}  // namespace blameless
