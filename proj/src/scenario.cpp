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

#include "blameless/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace blameless {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::ValidationError, field + ": " + why);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) invalid(where + key, "missing required field");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(field, "must be finite");
  return v;
}

Eigen::VectorXd vector(const json& j, const std::string& field) {
  if (!j.is_array()) invalid(field, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], field);
  return v;
}

Eigen::MatrixXd matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) invalid(field, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) invalid(field, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], field);
    }
  }
  return m;
}

Eigen::Matrix2d matrix2(const json& j, const std::string& field) {
  const Eigen::MatrixXd m = matrix(j, field);
  if (m.rows() != 2 || m.cols() != 2) invalid(field, "expected a 2x2 matrix");
  return m;
}

void require_psd(const Eigen::MatrixXd& m, const std::string& field) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) invalid(field, "must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-10) invalid(field, "must be positive semidefinite");
}

Polytope2 polytope(const json& j, const std::string& field) {
  const json& verts = require(j, "vertices", field + ".");
  if (!verts.is_array()) invalid(field + ".vertices", "expected an array of [x, y] pairs");
  PointList pts;
  for (const auto& v : verts) {
    if (!v.is_array() || v.size() != 2) invalid(field + ".vertices", "each vertex must be [x, y]");
    pts.emplace_back(number(v[0], field), number(v[1], field));
  }
  try {
    return Polytope2::from_vertices(pts);
  } catch (const Error& e) {
    invalid(field, e.what());
  }
}

std::vector<std::string> strings(const json& j, const std::string& field) {
  if (!j.is_array()) invalid(field, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) invalid(field, "expected an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

NestedFamily ScenarioConfig::family() const {
  if (sets_nested) return NestedFamily(sets);
  return nested_from_prioritized(sets);
}

OcpInstance ScenarioConfig::instance() const {
  OcpInstance inst;
  inst.dynamics = discretize_zoh(dynamics, dt);
  inst.x0 = x0;
  inst.horizon = horizon;
  inst.box = box;
  inst.selector = selector;
  inst.weights.R = R;
  inst.weights.Q = Q;
  inst.terminal_equalities = terminal_equalities;
  inst.validate();
  return inst;
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) invalid("config", "top level must be an object");
  ScenarioConfig cfg;

  const json& dyn = require(j, "dynamics", "");
  if (dyn.contains("model")) {
    if (dyn.at("model") != "lander") invalid("dynamics.model", "only \"lander\" is built in");
    cfg.dynamics = lander_dynamics(dyn.contains("gravity") ? number(dyn.at("gravity"), "dynamics.gravity") : 9.81);
  } else {
    cfg.dynamics.A = matrix(require(dyn, "A", "dynamics."), "dynamics.A");
    cfg.dynamics.B = matrix(require(dyn, "B", "dynamics."), "dynamics.B");
    const Eigen::Index n = cfg.dynamics.A.rows();
    cfg.dynamics.c = dyn.contains("c") ? vector(dyn.at("c"), "dynamics.c") : Eigen::VectorXd::Zero(n);
    if (cfg.dynamics.A.cols() != n) invalid("dynamics.A", "must be square");
    if (cfg.dynamics.B.rows() != n) invalid("dynamics.B", "row count must match A");
    if (cfg.dynamics.c.size() != n) invalid("dynamics.c", "length must match A");
  }
  if (dyn.contains("state_labels")) cfg.dynamics.state_labels = strings(dyn.at("state_labels"), "dynamics.state_labels");
  if (dyn.contains("input_labels")) cfg.dynamics.input_labels = strings(dyn.at("input_labels"), "dynamics.input_labels");
  const Eigen::Index n = cfg.dynamics.states();
  const Eigen::Index l = cfg.dynamics.inputs();
  if (cfg.dynamics.state_labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) cfg.dynamics.state_labels.push_back("x" + std::to_string(i));
  }
  if (cfg.dynamics.input_labels.empty()) {
    for (Eigen::Index i = 0; i < l; ++i) cfg.dynamics.input_labels.push_back("u" + std::to_string(i));
  }
  if (static_cast<Eigen::Index>(cfg.dynamics.state_labels.size()) != n) invalid("dynamics.state_labels", "one label per state");
  if (static_cast<Eigen::Index>(cfg.dynamics.input_labels.size()) != l) invalid("dynamics.input_labels", "one label per input");

  if (dyn.contains("dt")) cfg.dt = number(dyn.at("dt"), "dynamics.dt");
  if (!(cfg.dt > 0.0)) invalid("dynamics.dt", "must be positive");
  if (dyn.contains("N")) {
    if (!dyn.at("N").is_number_integer() || dyn.at("N").get<long long>() < 1) invalid("dynamics.N", "must be a positive integer");
    cfg.horizon = dyn.at("N").get<Eigen::Index>();
  }

  cfg.x0 = vector(require(j, "x0", ""), "x0");
  if (cfg.x0.size() != n) invalid("x0", "length must match the state dimension");

  const json& box = require(j, "input_box", "");
  cfg.box.lower = vector(require(box, "lower", "input_box."), "input_box.lower");
  cfg.box.upper = vector(require(box, "upper", "input_box."), "input_box.upper");
  if (cfg.box.lower.size() != l || cfg.box.upper.size() != l) invalid("input box", "bounds must have one entry per input");
  if ((cfg.box.lower.array() > cfg.box.upper.array()).any()) invalid("input box", "lower bound exceeds upper bound");

  if (j.contains("selector")) {
    const json& sel = j.at("selector");
    if (!sel.is_array() || sel.size() != 2 || !sel[0].is_number_integer() || !sel[1].is_number_integer()) {
      invalid("selector", "expected two state indices");
    }
    cfg.selector.rows = {sel[0].get<Eigen::Index>(), sel[1].get<Eigen::Index>()};
  }
  for (auto r : cfg.selector.rows) {
    if (r < 0 || r >= n) invalid("selector", "index out of range");
  }
  if (cfg.selector.rows[0] == cfg.selector.rows[1]) invalid("selector", "indices must differ");

  const json& sets = require(j, "sets", "");
  if (sets.contains("kind")) {
    const std::string kind = sets.at("kind").get<std::string>();
    if (kind != "nested" && kind != "prioritized") invalid("sets.kind", "must be \"nested\" or \"prioritized\"");
    cfg.sets_nested = kind == "nested";
  }
  const json& polys = require(sets, "polytopes", "sets.");
  if (!polys.is_array() || polys.empty()) invalid("sets.polytopes", "expected a non-empty array");
  for (std::size_t i = 0; i < polys.size(); ++i) {
    cfg.sets.push_back(polytope(polys[i], "sets.polytopes[" + std::to_string(i) + "]"));
  }

  const json& weights = require(j, "weights", "");
  cfg.R = matrix(require(weights, "R", "weights."), "weights.R");
  if (cfg.R.rows() != l || cfg.R.cols() != l) invalid("weights.R", "must be l x l");
  require_psd(cfg.R, "weights.R");
  cfg.Q = matrix2(require(weights, "Q", "weights."), "weights.Q");
  require_psd(cfg.Q, "weights.Q");
  if (weights.contains("compare_Q")) {
    const json& cq = weights.at("compare_Q");
    if (!cq.is_array()) invalid("weights.compare_Q", "expected an array of 2x2 matrices");
    for (std::size_t i = 0; i < cq.size(); ++i) {
      const std::string field = "weights.compare_Q[" + std::to_string(i) + "]";
      cfg.compare_Q.push_back(matrix2(cq[i], field));
      require_psd(cfg.compare_Q.back(), field);
    }
  }

  if (j.contains("objective")) {
    const json& obj = j.at("objective");
    if (obj.contains("g0")) cfg.g0 = number(obj.at("g0"), "objective.g0");
    if (obj.contains("g1")) cfg.g1 = number(obj.at("g1"), "objective.g1");
    if (obj.contains("grid")) {
      if (!obj.at("grid").is_number_integer() || obj.at("grid").get<int>() < 2) invalid("objective.grid", "must be an integer >= 2");
      cfg.grid = obj.at("grid").get<int>();
    }
  }
  if (!(cfg.g1 > cfg.g0)) invalid("objective", "g1 must exceed g0");

  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    if (s.contains("M")) {
      if (!s.at("M").is_number_integer() || s.at("M").get<long long>() < 1) invalid("sampling.M", "must be a positive integer");
      cfg.samples = s.at("M").get<std::size_t>();
    }
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) invalid("sampling.seed", "must be a non-negative integer");
      cfg.seed = s.at("seed").get<std::uint64_t>();
    }
  }

  if (j.contains("terminal_equalities")) {
    for (const auto& e : j.at("terminal_equalities")) {
      TerminalEquality eq;
      const json& st = require(e, "state", "terminal_equalities[].");
      if (!st.is_number_integer()) invalid("terminal_equalities.state", "must be a state index");
      eq.state = st.get<Eigen::Index>();
      if (eq.state < 0 || eq.state >= n) invalid("terminal_equalities.state", "index out of range");
      eq.value = number(require(e, "value", "terminal_equalities[]."), "terminal_equalities.value");
      cfg.terminal_equalities.push_back(eq);
    }
  }
  if (j.contains("reference_outcomes")) cfg.reference_outcomes = j.at("reference_outcomes");
  return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to a 1-based line number.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("config: ") + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace blameless
