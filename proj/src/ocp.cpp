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

#include "blameless/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/QR>

namespace blameless {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

void check_dimensions(const QpProblem& p) {
  const Eigen::Index d = p.dim();
  const bool ok = p.H.cols() == d && p.f.size() == d && p.G.cols() == d && p.G.rows() == p.h.size() &&
                  p.A_eq.cols() == d && p.A_eq.rows() == p.b_eq.size();
  if (!ok) throw Error(ErrorKind::ValidationError, "QP dimensions are inconsistent");
  if (d > 0 && (p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, p.H.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::ValidationError, "QP Hessian is not symmetric");
  }
}

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

// Equality-constrained QP on the guessed active set, solved in extended precision.
bool polish(const QpProblem& p, const Eigen::VectorXd& s, const Eigen::VectorXd& lambda, SolveReport& out) {
  const Eigen::Index d = p.dim();
  const Eigen::Index me = p.A_eq.rows();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > s(i)) active.push_back(i);
  }
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  const Eigen::Index k = d + me + na;

  MatrixXld K = MatrixXld::Zero(k, k);
  VectorXld rhs = VectorXld::Zero(k);
  K.topLeftCorner(d, d) = p.H.cast<long double>();
  rhs.head(d) = -p.f.cast<long double>();
  if (me > 0) {
    K.block(0, d, d, me) = p.A_eq.transpose().cast<long double>();
    K.block(d, 0, me, d) = p.A_eq.cast<long double>();
    rhs.segment(d, me) = p.b_eq.cast<long double>();
  }
  for (Eigen::Index j = 0; j < na; ++j) {
    const auto row = p.G.row(active[j]).cast<long double>();
    K.block(0, d + me + j, d, 1) = row.transpose();
    K.block(d + me + j, 0, 1, d) = row;
    rhs(d + me + j) = static_cast<long double>(p.h(active[j]));
  }
  // factor in double, refine with extended-precision residuals
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K.cast<double>());
  VectorXld sol = cod.solve(rhs.cast<double>()).cast<long double>();
  for (int r = 0; r < 3 && sol.allFinite(); ++r) {
    const VectorXld res = rhs - K * sol;
    sol += cod.solve(res.cast<double>()).cast<long double>();
  }
  if (!sol.allFinite()) return false;

  out.z = sol.head(d).cast<double>();
  out.duals_eq = sol.segment(d, me).cast<double>();
  out.duals_ineq = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index j = 0; j < na; ++j) {
    const double mult = static_cast<double>(sol(d + me + j));
    if (mult < -1e-9) return false;
    out.duals_ineq(active[j]) = std::max(0.0, mult);
  }
  return true;
}

SolveReport equality_qp(const QpProblem& p, const SolverOptions& opts) {
  SolveReport report;
  const Eigen::VectorXd no_s(0);
  const Eigen::VectorXd no_lambda(0);
  if (!polish(p, no_s, no_lambda, report)) throw Error(ErrorKind::IllConditioned, "KKT system is singular");
  report.iterations = 1;
  report.residuals = kkt_residuals(p, report.z, report.duals_ineq, report.duals_eq);
  report.objective = p.value(report.z);
  report.status = report.residuals.max() <= opts.kkt_tol ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  return report;
}

SolveReport interior_point(const QpProblem& p, const SolverOptions& opts) {
  const Eigen::Index d = p.dim();
  const Eigen::Index mi = p.G.rows();
  const Eigen::Index me = p.A_eq.rows();
  if (mi == 0) return equality_qp(p, opts);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(me);
  Eigen::VectorXd s = (p.h - p.G * z).cwiseMax(1.0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(mi);

  const double reg = 1e-13 * std::max(1.0, p.H.cwiseAbs().maxCoeff());
  SolveReport best;
  best.status = SolveStatus::MaxIterations;
  double best_residual = std::numeric_limits<double>::infinity();

  auto consider = [&](SolveReport candidate, int iter) {
    candidate.residuals = kkt_residuals(p, candidate.z, candidate.duals_ineq, candidate.duals_eq);
    candidate.iterations = iter;
    const double r = candidate.residuals.max();
    if (r < best_residual) {
      best_residual = r;
      best = std::move(candidate);
    }
  };

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXd r_d = p.H * z + p.f + p.G.transpose() * lambda + p.A_eq.transpose() * nu;
    const Eigen::VectorXd r_e = p.A_eq * z - p.b_eq;
    const Eigen::VectorXd r_i = p.G * z + s - p.h;
    const double mu = s.dot(lambda) / static_cast<double>(mi);

    if (!z.allFinite() || !std::isfinite(mu)) {
      if (std::isfinite(best_residual)) break;
      throw Error(ErrorKind::IllConditioned, "interior-point iterates diverged");
    }
    // nothing left to gain once the gap sits at rounding level
    if (mu < 1e-18 * std::max(1.0, s.cwiseAbs().maxCoeff())) break;

    if (mu < 1e-6) {
      SolveReport polished;
      if (polish(p, s, lambda, polished)) {
        consider(std::move(polished), iter);
        if (best_residual <= 0.01 * opts.kkt_tol) break;
      }
    }
    SolveReport raw;
    raw.z = z;
    raw.duals_ineq = lambda;
    raw.duals_eq = nu;
    consider(std::move(raw), iter);
    if (best_residual <= 0.01 * opts.kkt_tol) break;

    // Reduced Newton system [[H + G'(L/S)G, A'], [A, 0]].
    const Eigen::VectorXd w = lambda.cwiseQuotient(s);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + me, d + me);
    K.topLeftCorner(d, d) = p.H + p.G.transpose() * w.asDiagonal() * p.G;
    K.topLeftCorner(d, d).diagonal().array() += reg;
    if (me > 0) {
      K.block(0, d, d, me) = p.A_eq.transpose();
      K.block(d, 0, me, d) = p.A_eq;
      K.bottomRightCorner(me, me).diagonal().array() -= reg;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);

    auto direction = [&](const Eigen::VectorXd& r_c, Eigen::VectorXd& dz, Eigen::VectorXd& dnu,
                         Eigen::VectorXd& ds, Eigen::VectorXd& dl) {
      Eigen::VectorXd rhs(d + me);
      rhs.head(d) = -r_d + p.G.transpose() * (r_c - lambda.cwiseProduct(r_i)).cwiseQuotient(s);
      if (me > 0) rhs.tail(me) = -r_e;
      const Eigen::VectorXd sol = lu.solve(rhs);
      dz = sol.head(d);
      dnu = sol.tail(me);
      ds = -r_i - p.G * dz;
      dl = (-r_c - lambda.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dz, dnu, ds, dl;
    direction(s.cwiseProduct(lambda), dz, dnu, ds, dl);
    const double a_aff = std::min(max_step(s, ds), max_step(lambda, dl));
    const double mu_aff = (s + a_aff * ds).dot(lambda + a_aff * dl) / static_cast<double>(mi);
    const double sigma = std::pow(mu_aff / mu, 3);

    const Eigen::VectorXd r_c =
        s.cwiseProduct(lambda) + ds.cwiseProduct(dl) - Eigen::VectorXd::Constant(mi, sigma * mu);
    direction(r_c, dz, dnu, ds, dl);
    const double alpha = std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(lambda, dl)));

    z += alpha * dz;
    nu += alpha * dnu;
    s += alpha * ds;
    lambda += alpha * dl;
    s = s.cwiseMax(1e-300);
    lambda = lambda.cwiseMax(1e-300);
  }

  best.objective = p.value(best.z);
  best.status = best_residual <= opts.kkt_tol ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  return best;
}

}  // namespace

QpProblem QpProblem::unconstrained(const Eigen::MatrixXd& H, const Eigen::VectorXd& f, double constant) {
  QpProblem p;
  p.H = H;
  p.f = f;
  p.constant = constant;
  p.G.resize(0, H.rows());
  p.h.resize(0);
  p.A_eq.resize(0, H.rows());
  p.b_eq.resize(0);
  return p;
}

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& duals_ineq,
                           const Eigen::VectorXd& duals_eq) {
  const VectorXld zl = z.cast<long double>();
  const VectorXld ll = duals_ineq.cast<long double>();
  const VectorXld nl = duals_eq.cast<long double>();
  const MatrixXld Gl = p.G.cast<long double>();
  const MatrixXld Al = p.A_eq.cast<long double>();

  VectorXld stat = p.H.cast<long double>() * zl + p.f.cast<long double>();
  if (ll.size() > 0) stat += Gl.transpose() * ll;
  if (nl.size() > 0) stat += Al.transpose() * nl;
  const VectorXld slack = p.h.cast<long double>() - Gl * zl;
  const VectorXld eq = Al * zl - p.b_eq.cast<long double>();

  KktResiduals r;
  r.stationarity = stat.size() ? static_cast<double>(stat.cwiseAbs().maxCoeff()) : 0.0;
  if (ll.size() > 0) {
    r.stationarity = std::max(r.stationarity, static_cast<double>((-ll).maxCoeff()));
    r.primal = std::max(0.0, static_cast<double>((-slack).maxCoeff()));
    r.complementarity = static_cast<double>(ll.cwiseProduct(slack).cwiseAbs().maxCoeff());
  }
  if (eq.size() > 0) r.primal = std::max(r.primal, static_cast<double>(eq.cwiseAbs().maxCoeff()));
  return r;
}

void append_box_rows(const InputBox& box, Eigen::Index dim, Eigen::MatrixXd& G, Eigen::VectorXd& h) {
  const Eigen::Index l = box.lower.size();
  if (l == 0 || dim % l != 0) throw Error(ErrorKind::ValidationError, "input box does not tile the variables");
  const Eigen::Index rows0 = G.rows();
  Eigen::MatrixXd G2 = Eigen::MatrixXd::Zero(rows0 + 2 * dim, G.cols());
  Eigen::VectorXd h2(rows0 + 2 * dim);
  if (rows0 > 0) {
    G2.topRows(rows0) = G;
    h2.head(rows0) = h;
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    G2(rows0 + 2 * i, i) = 1.0;
    h2(rows0 + 2 * i) = box.upper(i % l);
    G2(rows0 + 2 * i + 1, i) = -1.0;
    h2(rows0 + 2 * i + 1) = -box.lower(i % l);
  }
  G = std::move(G2);
  h = std::move(h2);
}

Phase1Result phase1_feasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, const Eigen::MatrixXd& A_eq,
                             const Eigen::VectorXd& b_eq, const std::optional<InputBox>& box,
                             const SolverOptions& opts) {
  const Eigen::Index d = std::max(G.cols(), A_eq.cols());
  const Eigen::Index mi = G.rows();
  const Eigen::Index me = A_eq.rows();
  if ((mi > 0 && G.cols() != d) || (me > 0 && A_eq.cols() != d) || h.size() != mi || b_eq.size() != me) {
    throw Error(ErrorKind::ValidationError, "phase-1 dimensions are inconsistent");
  }

  // Variables (z, sigma): min sigma  s.t.  Gz - h <= sigma, |Az - b| <= sigma, sigma >= -1.
  const Eigen::Index nv = d + 1;
  const Eigen::Index rows = mi + 2 * me + 1;
  QpProblem q;
  // pure LP: a quadratic term here would trade violation against |z|
  q.H = Eigen::MatrixXd::Zero(nv, nv);
  q.f = Eigen::VectorXd::Zero(nv);
  q.f(d) = 1.0;
  q.G = Eigen::MatrixXd::Zero(rows, nv);
  q.h = Eigen::VectorXd::Zero(rows);
  if (mi > 0) {
    q.G.topLeftCorner(mi, d) = G;
    q.G.block(0, d, mi, 1).setConstant(-1.0);
    q.h.head(mi) = h;
  }
  if (me > 0) {
    q.G.block(mi, 0, me, d) = A_eq;
    q.G.block(mi, d, me, 1).setConstant(-1.0);
    q.h.segment(mi, me) = b_eq;
    q.G.block(mi + me, 0, me, d) = -A_eq;
    q.G.block(mi + me, d, me, 1).setConstant(-1.0);
    q.h.segment(mi + me, me) = -b_eq;
  }
  q.G(rows - 1, d) = -1.0;
  q.h(rows - 1) = 1.0;
  if (box) {
    Eigen::MatrixXd Gb(0, d);
    Eigen::VectorXd hb(0);
    append_box_rows(*box, d, Gb, hb);
    const Eigen::Index r0 = q.G.rows();
    q.G.conservativeResize(r0 + Gb.rows(), Eigen::NoChange);
    q.h.conservativeResize(r0 + hb.size());
    q.G.bottomRows(Gb.rows()).setZero();
    q.G.bottomLeftCorner(Gb.rows(), d) = Gb;
    q.h.tail(hb.size()) = hb;
  }
  q.A_eq.resize(0, nv);
  q.b_eq.resize(0);

  const SolveReport rep = interior_point(q, opts);
  Phase1Result out;
  out.z = rep.z.head(d);
  // Report the violation measured at z, not the epigraph variable.
  double viol = -1.0;
  if (mi > 0) viol = std::max(viol, (G * out.z - h).maxCoeff());
  if (me > 0) viol = std::max(viol, (A_eq * out.z - b_eq).cwiseAbs().maxCoeff());
  out.violation = viol;
  out.feasible = viol <= opts.feas_tol;
  out.converged = rep.status == SolveStatus::Optimal;
  return out;
}

SolveReport solve_qp(const QpProblem& p, const SolverOptions& opts) {
  check_dimensions(p);
  if (opts.check_feasibility && (p.G.rows() > 0 || p.A_eq.rows() > 0)) {
    const Phase1Result ph1 = phase1_feasible(p.G, p.h, p.A_eq, p.b_eq, std::nullopt, opts);
    // an unconverged phase-1 proves nothing; let the main solve decide
    if (!ph1.feasible && ph1.converged) {
      SolveReport report;
      report.status = SolveStatus::Infeasible;
      report.z = ph1.z;
      report.objective = p.value(ph1.z);
      report.duals_ineq = Eigen::VectorXd::Zero(p.G.rows());
      report.duals_eq = Eigen::VectorXd::Zero(p.A_eq.rows());
      report.infeasibility = ph1.violation;
      return report;
    }
  }
  return interior_point(p, opts);
}

EpigraphResult solve_lp_epigraph(std::span<const AffinePiece> pieces, const CondensedMap& map,
                                 const Eigen::VectorXd& x0, const InputBox& box, double g0,
                                 const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq, double rho,
                                 const SolverOptions& opts) {
  const Eigen::Index du = map.Gamma.cols();
  const Eigen::Index nv = du + 1;
  const Eigen::Index np = static_cast<Eigen::Index>(pieces.size());
  const Eigen::Vector2d offset = map.selected_offset(x0);

  QpProblem q;
  q.H = 2.0 * rho * Eigen::MatrixXd::Identity(nv, nv);
  q.f = Eigen::VectorXd::Zero(nv);
  q.f(du) = 1.0;
  // alpha' (offset + EGamma u) + beta - t <= 0, and g0 - t <= 0.
  q.G = Eigen::MatrixXd::Zero(np + 1, nv);
  q.h = Eigen::VectorXd::Zero(np + 1);
  for (Eigen::Index r = 0; r < np; ++r) {
    const auto& piece = pieces[r];
    q.G.block(r, 0, 1, du) = piece.alpha.transpose() * map.selected_Gamma;
    q.G(r, du) = -1.0;
    q.h(r) = -piece.beta - piece.alpha.dot(offset);
  }
  q.G(np, du) = -1.0;
  q.h(np) = -g0;
  {
    Eigen::MatrixXd Gb(0, du);
    Eigen::VectorXd hb(0);
    append_box_rows(box, du, Gb, hb);
    const Eigen::Index r0 = q.G.rows();
    q.G.conservativeResize(r0 + Gb.rows(), Eigen::NoChange);
    q.h.conservativeResize(r0 + hb.size());
    q.G.bottomRows(Gb.rows()).setZero();
    q.G.bottomLeftCorner(Gb.rows(), du) = Gb;
    q.h.tail(hb.size()) = hb;
  }
  q.A_eq = Eigen::MatrixXd::Zero(A_eq.rows(), nv);
  if (A_eq.rows() > 0) q.A_eq.leftCols(du) = A_eq;
  q.b_eq = A_eq.rows() > 0 ? b_eq : Eigen::VectorXd(0);

  EpigraphResult out;
  out.report = solve_qp(q, opts);
  if (out.report.status == SolveStatus::Infeasible) {
    throw Error(ErrorKind::NoBlamelessSolution, "terminal equalities cannot be met within the horizon");
  }
  out.u = out.report.z.head(du);
  out.value = out.report.z(du);
  out.terminal = offset + map.selected_Gamma * out.u;
  return out;
}

}  // namespace blameless
