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

#include "blameless/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blameless {

using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json polytope_to_json(const Polytope2& p) {
  json verts = json::array();
  for (const auto& v : p.vertices()) verts.push_back({v.x(), v.y()});
  return {{"vertices", verts}};
}

Polytope2 polytope_from_json(const json& j) {
  PointList pts;
  for (const auto& v : j.at("vertices")) pts.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  return Polytope2::from_vertices(pts);
}

json objective_to_json(const PiecewiseAffineObjective& obj) {
  json pieces = json::array();
  for (const auto& p : obj.pieces()) {
    pieces.push_back({{"alpha", {p.alpha.x(), p.alpha.y()}}, {"beta", p.beta}});
  }
  return {{"g_levels", obj.level_values()}, {"pieces", pieces}, {"base", polytope_to_json(obj.base_region())}};
}

json report_to_json(const SolveReport& r) {
  return {{"status", std::string(to_string(r.status))},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"infeasibility", r.infeasibility},
          {"kkt", {{"stationarity", r.residuals.stationarity},
                   {"primal", r.residuals.primal},
                   {"complementarity", r.residuals.complementarity}}}};
}

json validation_to_json(const ValidationReport& r) {
  return {{"passed", r.passed},
          {"max_vertex_error", r.max_vertex_error},
          {"monotonicity_pairs", r.monotonicity_pairs},
          {"monotonicity_violations", r.monotonicity_violations},
          {"convexity_triples", r.convexity_triples},
          {"convexity_violations", r.convexity_violations}};
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& state_labels,
                           const std::vector<std::string>& input_labels) {
  std::string out = "t";
  for (const auto& s : state_labels) out += "," + s;
  for (const auto& s : input_labels) out += "," + s;
  out += '\n';
  const Eigen::Index N = traj.horizon();
  for (Eigen::Index k = 0; k <= N; ++k) {
    out += format_real(static_cast<double>(k) * traj.dt);
    for (Eigen::Index i = 0; i < traj.states.cols(); ++i) out += "," + format_real(traj.states(k, i));
    for (Eigen::Index i = 0; i < traj.inputs.cols(); ++i) {
      out += ",";
      if (k < N) out += format_real(traj.inputs(k, i));
    }
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& text, Eigen::Index n_states, Eigen::Index n_inputs) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "trajectory CSV is empty");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<Eigen::Index>(fields.size()) != 1 + n_states + n_inputs) {
      throw Error(ErrorKind::ParseError, "trajectory CSV row has the wrong number of fields");
    }
    rows.push_back(std::move(fields));
  }
  if (rows.size() < 2) throw Error(ErrorKind::ParseError, "trajectory CSV needs at least two rows");

  auto parse = [](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorKind::ParseError, "bad number '" + s + "' in trajectory CSV");
    }
    return v;
  };

  const Eigen::Index N = static_cast<Eigen::Index>(rows.size()) - 1;
  Trajectory traj;
  traj.states.resize(N + 1, n_states);
  traj.inputs.resize(N, n_inputs);
  for (Eigen::Index k = 0; k <= N; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n_states; ++i) traj.states(k, i) = parse(r[1 + i]);
    for (Eigen::Index i = 0; i < n_inputs; ++i) {
      const std::string& f = r[1 + n_states + i];
      if (k < N) {
        traj.inputs(k, i) = parse(f);
      } else if (!f.empty()) {
        throw Error(ErrorKind::ParseError, "last trajectory row must leave inputs blank");
      }
    }
  }
  traj.dt = parse(rows[1][0]) - parse(rows[0][0]);
  return traj;
}

std::string points_csv(const PointList& pts, const std::string& header) {
  std::string out = header + '\n';
  for (const auto& p : pts) out += format_real(p.x()) + "," + format_real(p.y()) + '\n';
  return out;
}

std::string objective_grid_csv(const PiecewiseAffineObjective& obj, int grid) {
  auto box = obj.family().level(obj.family().size()).bounding_box();
  const Point2 pad = 0.1 * (box[1] - box[0]);
  box[0] -= pad;
  box[1] += pad;
  std::string out = "x,y,g\n";
  for (int iy = 0; iy < grid; ++iy) {
    const double y = box[0].y() + (box[1].y() - box[0].y()) * iy / (grid - 1);
    for (int ix = 0; ix < grid; ++ix) {
      const double x = box[0].x() + (box[1].x() - box[0].x()) * ix / (grid - 1);
      out += format_real(x) + "," + format_real(y) + "," + format_real(evaluate(obj, {x, y})) + '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ValidationError, "cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace blameless
