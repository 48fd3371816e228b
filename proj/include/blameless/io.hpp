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

#ifndef BLAMELESS_IO_HPP
#define BLAMELESS_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "blameless/blameless.hpp"

namespace blameless {

/// 17 significant digits, '.' decimal point, locale independent.
std::string format_real(double v);

nlohmann::json polytope_to_json(const Polytope2& p);
Polytope2 polytope_from_json(const nlohmann::json& j);

nlohmann::json objective_to_json(const PiecewiseAffineObjective& obj);
nlohmann::json report_to_json(const SolveReport& r);
nlohmann::json validation_to_json(const ValidationReport& r);

/// Header t, <state labels>, <input labels>; N+1 rows, inputs blank on the last.
std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& state_labels,
                           const std::vector<std::string>& input_labels);
/// Parses what trajectory_csv writes; throws ParseError on malformed input.
Trajectory parse_trajectory_csv(const std::string& text, Eigen::Index n_states, Eigen::Index n_inputs);

std::string points_csv(const PointList& pts, const std::string& header);

/// (x, y, g) on a grid x grid lattice over the bounding box of Y_m inflated by 10%.
std::string objective_grid_csv(const PiecewiseAffineObjective& obj, int grid);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace blameless

#endif  // BLAMELESS_IO_HPP
