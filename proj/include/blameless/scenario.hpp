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

#ifndef BLAMELESS_SCENARIO_HPP
#define BLAMELESS_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blameless/blameless.hpp"

namespace blameless {

inline constexpr double kDefaultDt = 0.2;
inline constexpr Eigen::Index kDefaultHorizon = 60;
inline constexpr std::size_t kDefaultSamples = 100000;
inline constexpr int kDefaultGrid = 201;

struct ScenarioConfig {
  ContinuousAffineDynamics dynamics;
  double dt = kDefaultDt;
  Eigen::Index horizon = kDefaultHorizon;
  Eigen::VectorXd x0;
  InputBox box;
  TerminalSelector selector;
  /// true: `sets` are Y_1..Y_m already nested. false: they are Z_1..Z_m by priority.
  bool sets_nested = true;
  std::vector<Polytope2> sets;
  Eigen::MatrixXd R;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  std::vector<Eigen::Matrix2d> compare_Q;
  double g0 = 0.0;
  double g1 = 1.0;
  int grid = kDefaultGrid;
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  std::vector<TerminalEquality> terminal_equalities;
  /// Free-form outcomes to report next to computed ones (compare command).
  nlohmann::json reference_outcomes;

  NestedFamily family() const;
  OcpInstance instance() const;
};

/// Throws ParseError (with line number) or ValidationError (naming the field).
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig config_from_json(const nlohmann::json& j);

}  // namespace blameless

#endif  // BLAMELESS_SCENARIO_HPP
