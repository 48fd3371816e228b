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

#ifndef BLAMELESS_DYNAMICS_HPP
#define BLAMELESS_DYNAMICS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "blameless/geometry2d.hpp"

namespace blameless {

/// x' = A x + B u + c
struct ContinuousAffineDynamics {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd c;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
};

/// x_{k+1} = A x_k + B u_k + c
struct DiscreteAffineDynamics {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd c;
  double dt = 0.0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const { return A * x + B * u + c; }
};

struct InputBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Throws ValidationError if the bounds cross or differ in size.
  void validate() const;
  bool contains(const Eigen::VectorXd& u, double tol = 0.0) const;
};

/// Picks the two state coordinates the safety sets constrain.
struct TerminalSelector {
  std::array<Eigen::Index, 2> rows{0, 1};

  Eigen::MatrixXd matrix(Eigen::Index n) const;
  Point2 apply(const Eigen::VectorXd& x) const { return {x(rows[0]), x(rows[1])}; }
};

/// states is (N+1) x n, inputs is N x l; row k is time k.
struct Trajectory {
  Eigen::MatrixXd states;
  Eigen::MatrixXd inputs;
  double dt = 0.0;

  Eigen::Index horizon() const { return inputs.rows(); }
  Eigen::VectorXd terminal() const { return states.row(states.rows() - 1).transpose(); }
};

struct TrajectoryResiduals {
  double dynamics = 0.0;  // max_k |x_{k+1} - f(x_k, u_k)|_inf
  double box = 0.0;       // worst input-bound violation (<= 0 when inside)
};

/// x_N = Phi x_0 + Gamma vec(u) + omega, vec(u) = [u_0; u_1; ...; u_{N-1}].
struct CondensedMap {
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd Gamma;
  Eigen::VectorXd omega;
  Eigen::MatrixXd selected_Gamma;  // E Gamma
  Eigen::MatrixXd selected_Phi;    // E Phi
  Eigen::Vector2d selected_omega;  // E omega
  Eigen::Index horizon = 0;

  Eigen::VectorXd terminal(const Eigen::VectorXd& x0, const Eigen::VectorXd& u) const {
    return Phi * x0 + Gamma * u + omega;
  }
  /// E (Phi x0 + omega): the selected terminal point under zero input.
  Eigen::Vector2d selected_offset(const Eigen::VectorXd& x0) const { return selected_Phi * x0 + selected_omega; }
};

DiscreteAffineDynamics discretize_zoh(const ContinuousAffineDynamics& cont, double dt);

Trajectory rollout(const DiscreteAffineDynamics& dyn, const Eigen::VectorXd& x0, const Eigen::MatrixXd& inputs);

TrajectoryResiduals trajectory_residuals(const Trajectory& traj, const DiscreteAffineDynamics& dyn,
                                         const InputBox& box);

CondensedMap condense_terminal(const DiscreteAffineDynamics& dyn, Eigen::Index horizon,
                               const TerminalSelector& selector = {});

/// Stacks an N x l input matrix into vec(u), and back.
Eigen::VectorXd stack_inputs(const Eigen::MatrixXd& inputs);
Eigen::MatrixXd unstack_inputs(const Eigen::VectorXd& u, Eigen::Index n_inputs);

/// Projected terminal points E x_N for M i.i.d. uniform input sequences.
/// Sample j depends only on (seed, j); `threads` does not change the output.
PointList sample_successor(const DiscreteAffineDynamics& dyn, const Eigen::VectorXd& x0, const InputBox& box,
                           Eigen::Index horizon, const TerminalSelector& selector, std::size_t samples,
                           std::uint64_t seed, unsigned threads = 1);

/// The planar lander of the landing scenario: state (v_x, v_y, p_x, p_y),
/// input (a_x, a_y), gravity acting on v_y.
ContinuousAffineDynamics lander_dynamics(double gravity = 9.81);

}  // namespace blameless

#endif  // BLAMELESS_DYNAMICS_HPP
