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

#include <algorithm>
#include <filesystem>
#include <limits>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "blameless/io.hpp"
#include "blameless/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace blameless;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoBlamelessSolution:
    case ErrorKind::InfeasibleStage2:
    case ErrorKind::SolverFailure:
    case ErrorKind::IllConditioned:
      return kExitSolver;
    default:
      return kExitValidation;
  }
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

json point_json(const Point2& p) { return json::array({p.x(), p.y()}); }

json optional_index(const std::optional<std::size_t>& i) { return i ? json(*i) : json(nullptr); }

// Smallest i whose projection onto one selected coordinate contains the value.
std::optional<std::size_t> interval_index(const NestedFamily& family, double value, int axis) {
  for (std::size_t i = 1; i <= family.size(); ++i) {
    const auto bb = family.level(i).bounding_box();
    if (value >= bb[0](axis) - kFeasTol && value <= bb[1](axis) + kFeasTol) return i;
  }
  return std::nullopt;
}

json controller_json(const Trajectory& traj, const NestedFamily& family, const ScenarioConfig& cfg, double cost) {
  const Point2 y = cfg.selector.apply(traj.terminal());
  const auto& labels = cfg.dynamics.state_labels;
  json memberships;
  memberships[labels[cfg.selector.rows[0]]] = optional_index(interval_index(family, y.x(), 0));
  memberships[labels[cfg.selector.rows[1]]] = optional_index(interval_index(family, y.y(), 1));
  return {{"i_achieved", optional_index(smallest_containing(family, y))},
          {"coordinate_index", memberships},
          {"terminal", point_json(y)},
          {"mission_cost", cost}};
}

json solution_json(const BlamelessSolution& sol, const std::string& csv_name) {
  json reports = json::array();
  for (const auto& r : sol.reports) reports.push_back(report_to_json(r));
  return {{"i_star", optional_index(sol.i_star)},
          {"stage1_value", sol.stage1_value},
          {"mission_cost", sol.mission_cost},
          {"subproblems", sol.subproblem_count},
          {"trajectory_csv", csv_name},
          {"solver", reports}};
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_trajectory(const fs::path& path, const Trajectory& traj, const ScenarioConfig& cfg) {
  write_text(path, trajectory_csv(traj, cfg.dynamics.state_labels, cfg.dynamics.input_labels));
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

int cmd_gen_objective(const ScenarioConfig& cfg, const fs::path& out) {
  const NestedFamily family = cfg.family();
  const PiecewiseAffineObjective obj = generate_objective(family, cfg.g0, cfg.g1);
  ValidationOptions vopts;
  vopts.seed = cfg.seed;
  const ValidationReport rep = validate_objective(obj, vopts);
  write_json(out / "objective.json", objective_to_json(obj));
  write_text(out / "objective_grid.csv", objective_grid_csv(obj, cfg.grid));
  write_json(out / "objective_validation.json", validation_to_json(rep));
  return rep.passed ? kExitOk : kExitValidation;
}

int cmd_solve(const ScenarioConfig& cfg, const fs::path& out) {
  const PiecewiseAffineObjective obj = generate_objective(cfg.family(), cfg.g0, cfg.g1);
  const BlamelessSolution sol = two_stage_solve(cfg.instance(), obj);
  write_trajectory(out / "trajectory.csv", sol.trajectory, cfg);
  write_json(out / "solution.json", solution_json(sol, "trajectory.csv"));
  return kExitOk;
}

int cmd_brute(const ScenarioConfig& cfg, const fs::path& out) {
  const BlamelessSolution sol = brute_force_solve(cfg.instance(), cfg.family());
  json j = solution_json(sol, sol.i_star ? "brute_trajectory.csv" : "");
  if (!sol.i_star) {
    write_json(out / "brute_solution.json", j);
    throw Error(ErrorKind::NoBlamelessSolution, "every brute-force subproblem is infeasible");
  }
  write_trajectory(out / "brute_trajectory.csv", sol.trajectory, cfg);
  write_json(out / "brute_solution.json", j);
  return kExitOk;
}

int cmd_compare(const ScenarioConfig& cfg, const fs::path& out) {
  const NestedFamily family = cfg.family();
  const OcpInstance inst = cfg.instance();
  const PiecewiseAffineObjective obj = generate_objective(family, cfg.g0, cfg.g1);
  const BlamelessSolution two = two_stage_solve(inst, obj);
  const BlamelessSolution brute = brute_force_solve(inst, family);

  json j;
  j["two_stage"] = controller_json(two.trajectory, family, cfg, two.mission_cost);
  j["two_stage"]["i_star"] = optional_index(two.i_star);
  j["two_stage"]["subproblems"] = two.subproblem_count;
  j["brute_force"] = brute.i_star ? controller_json(brute.trajectory, family, cfg, brute.mission_cost) : json::object();
  j["brute_force"]["i_star"] = optional_index(brute.i_star);
  j["brute_force"]["subproblems"] = brute.subproblem_count;

  double state_gap = std::numeric_limits<double>::infinity();
  if (brute.i_star) state_gap = (two.trajectory.states - brute.trajectory.states).cwiseAbs().maxCoeff();
  j["identical"] = {{"i_star", two.i_star == brute.i_star},
                    {"max_state_difference", brute.i_star ? json(state_gap) : json(nullptr)}};
  write_trajectory(out / "trajectory.csv", two.trajectory, cfg);
  if (brute.i_star) write_trajectory(out / "brute_trajectory.csv", brute.trajectory, cfg);

  std::vector<Eigen::Matrix2d> qs = cfg.compare_Q;
  if (qs.empty()) qs.push_back(cfg.Q);
  json pure = json::array();
  for (std::size_t k = 0; k < qs.size(); ++k) {
    CostWeights w = inst.weights;
    w.Q = qs[k];
    w.center = family.level(1).vertex_centroid();
    SolveReport rep;
    const Trajectory traj = pure_optimal_solve(inst, w, &rep);
    const std::string name = "pure_trajectory_" + std::to_string(k) + ".csv";
    write_trajectory(out / name, traj, cfg);
    json c = controller_json(traj, family, cfg, mission_cost(traj, w, cfg.selector));
    c["Q"] = {{qs[k](0, 0), qs[k](0, 1)}, {qs[k](1, 0), qs[k](1, 1)}};
    c["trajectory_csv"] = name;
    const BlameVerdict v = classify_blameworthiness(traj.inputs, inst, family);
    c["blameworthy"] = v.blameworthy;
    c["solver"] = report_to_json(rep);
    pure.push_back(c);
  }
  j["pure_optimal"] = pure;
  j["reference_outcomes"] = cfg.reference_outcomes;
  write_json(out / "compare.json", j);
  return kExitOk;
}

int cmd_successor(const ScenarioConfig& cfg, const fs::path& out) {
  const OcpInstance inst = cfg.instance();
  const PointList pts = sample_successor(inst.dynamics, inst.x0, inst.box, inst.horizon, inst.selector, cfg.samples,
                                         cfg.seed, worker_count());
  const auto& labels = cfg.dynamics.state_labels;
  write_text(out / "successor.csv",
             points_csv(pts, labels[cfg.selector.rows[0]] + "_N," + labels[cfg.selector.rows[1]] + "_N"));
  return kExitOk;
}

int cmd_validate(const ScenarioConfig& cfg, const fs::path& out) {
  const NestedFamily family = cfg.family();
  const OcpInstance inst = cfg.instance();
  json j;
  bool ok = true;
  auto check = [&](const std::string& name, bool passed, json detail) {
    detail["passed"] = passed;
    j[name] = detail;
    ok = ok && passed;
  };

  const PiecewiseAffineObjective obj = generate_objective(family, cfg.g0, cfg.g1);
  ValidationOptions vopts;
  vopts.seed = cfg.seed;
  const ValidationReport vrep = validate_objective(obj, vopts);
  check("objective", vrep.passed, validation_to_json(vrep));

  const BlamelessSolution two = two_stage_solve(inst, obj);
  const BlamelessSolution brute = brute_force_solve(inst, family);
  double kkt = 0.0;
  for (const auto& r : two.reports) kkt = std::max(kkt, r.residuals.max());
  for (const auto& r : brute.reports) {
    if (r.status == SolveStatus::Optimal) kkt = std::max(kkt, r.residuals.max());
  }
  check("kkt", kkt <= kKktTol, {{"max_residual", kkt}});

  const bool same_index = brute.i_star.has_value() && two.i_star == brute.i_star;
  double cost_gap = 0.0, state_gap = 0.0;
  if (same_index) {
    cost_gap = std::abs(two.mission_cost - brute.mission_cost) / (1.0 + std::abs(brute.mission_cost));
    state_gap = (two.trajectory.states - brute.trajectory.states).cwiseAbs().maxCoeff();
  }
  check("equivalence", same_index && cost_gap <= 1e-6 && state_gap <= 1e-6,
        {{"i_star_two_stage", optional_index(two.i_star)},
         {"i_star_brute_force", optional_index(brute.i_star)},
         {"relative_cost_gap", cost_gap},
         {"max_state_difference", state_gap}});

  const TrajectoryResiduals tr = trajectory_residuals(two.trajectory, inst.dynamics, inst.box);
  const Point2 y = inst.selector.apply(two.trajectory.terminal());
  const bool in_set = contains(family.level(*two.i_star), y, kFeasTol);
  check("trajectory", tr.dynamics <= 1e-9 && tr.box <= kFeasTol && in_set,
        {{"dynamics_residual", tr.dynamics}, {"box_violation", tr.box}, {"terminal_in_set", in_set}});

  // reload the emitted CSV and re-check it
  const std::string csv = trajectory_csv(two.trajectory, cfg.dynamics.state_labels, cfg.dynamics.input_labels);
  const Trajectory back = parse_trajectory_csv(csv, inst.dynamics.states(), inst.dynamics.inputs());
  const TrajectoryResiduals br = trajectory_residuals(back, inst.dynamics, inst.box);
  check("csv_roundtrip", back.horizon() == inst.horizon && br.dynamics <= 1e-9 && br.box <= kFeasTol,
        {{"rows", back.states.rows()}, {"dynamics_residual", br.dynamics}});

  const BlameVerdict verdict = classify_blameworthiness(two.trajectory.inputs, inst, family);
  check("blameless", !verdict.blameworthy,
        {{"i_achieved", optional_index(verdict.i_achieved)}, {"i_star_oracle", optional_index(verdict.i_star_oracle)}});

  const PointList pts = sample_successor(inst.dynamics, inst.x0, inst.box, inst.horizon, inst.selector, cfg.samples,
                                         cfg.seed, worker_count());
  double worst = std::numeric_limits<double>::infinity();
  bool hit = false;
  for (const auto& p : pts) {
    worst = std::min(worst, evaluate(obj, p));
    hit = hit || contains(family.level(*two.i_star), p, kFeasTol);
  }
  check("successor", worst >= two.stage1_value - 1e-6 && in_set,
        {{"samples", pts.size()},
         {"min_sampled_value", worst},
         {"stage1_value", two.stage1_value},
         {"sample_in_selected_set", hit}});

  j["passed"] = ok;
  write_json(out / "validation.json", j);
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blameless optimal control over prioritized terminal sets"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<long long> horizon;

  const std::vector<std::string> names{"gen-objective", "solve", "brute", "compare", "successor", "validate"};
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "scenario JSON")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "sampling seed");
    sub->add_option("--dt", dt, "sampling period [s]");
    sub->add_option("--horizon", horizon, "number of steps N");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    std::cerr << app.help();
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ScenarioConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (dt) {
      if (!(*dt > 0.0)) throw Error(ErrorKind::ValidationError, "--dt: must be positive");
      cfg.dt = *dt;
    }
    if (horizon) {
      if (*horizon < 1) throw Error(ErrorKind::ValidationError, "--horizon: must be at least 1");
      cfg.horizon = static_cast<Eigen::Index>(*horizon);
    }
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    if (command == "gen-objective") return cmd_gen_objective(cfg, out);
    if (command == "solve") return cmd_solve(cfg, out);
    if (command == "brute") return cmd_brute(cfg, out);
    if (command == "compare") return cmd_compare(cfg, out);
    if (command == "successor") return cmd_successor(cfg, out);
    return cmd_validate(cfg, out);
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    return kExitValidation;
  }
}
