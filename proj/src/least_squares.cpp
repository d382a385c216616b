// Copyright 2026 The Maneuver Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mplan/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include "mplan/errors.hpp"

namespace mplan
{

const char * to_string(Termination t)
{
  switch (t) {
    case Termination::kGradient:
      return "gradient";
    case Termination::kStep:
      return "step";
    case Termination::kMaxIterations:
      return "max_iterations";
    case Termination::kNoProgress:
      return "no_progress";
  }
  return "unknown";
}

Eigen::MatrixXd numeric_jacobian(
  const ResidualFunction & fn, const Eigen::VectorXd & x, int num_residuals, double h)
{
  Eigen::MatrixXd jac(num_residuals, x.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp(num_residuals);
  Eigen::VectorXd rm(num_residuals);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    fn(xp, rp, nullptr);
    xp[j] = x[j] - step;
    fn(xp, rm, nullptr);
    xp[j] = x[j];
    jac.col(j) = (rp - rm) / (2.0 * step);
  }
  return jac;
}

SolveReport damped_least_squares(
  const LeastSquaresProblem & problem, Eigen::VectorXd & x, const SolverTolerances & tol)
{
  if (problem.num_residuals <= 0 || !problem.residuals) {
    throw PlanningError("least-squares problem has no residuals");
  }
  const int m = problem.num_residuals;
  const Eigen::Index n = x.size();

  auto evaluate = [&](const Eigen::VectorXd & at, Eigen::VectorXd & r, Eigen::MatrixXd * jac) {
    r.resize(m);
    if (jac == nullptr) {
      problem.residuals(at, r, nullptr);
    } else if (problem.analytic_jacobian) {
      jac->resize(m, n);
      problem.residuals(at, r, jac);
    } else {
      problem.residuals(at, r, nullptr);
      *jac = numeric_jacobian(problem.residuals, at, m);
    }
  };

  SolveReport report;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  evaluate(x, r, &jac);
  double cost = r.squaredNorm();
  report.initial_cost = cost;

  double lambda = -1.0;
  double nu = 2.0;
  Eigen::VectorXd r_trial(m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  for (int it = 0; it < tol.max_iterations; ++it) {
    report.iterations = it + 1;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < tol.gradient) {
      report.converged = true;
      report.reason = Termination::kGradient;
      break;
    }
    Eigen::VectorXd diag = jtj.diagonal();
    const double diag_max = std::max(diag.maxCoeff(), 1e-12);
    diag = diag.cwiseMax(1e-9 * diag_max);
    if (lambda < 0.0) {
      lambda = 1e-6;
    }

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      ldlt.compute(a);
      Eigen::VectorXd delta;
      bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
      if (ok) {
        delta = ldlt.solve(-grad);
        ok = delta.allFinite();
      }
      if (!ok) {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e32) {
          stalled = true;
          break;
        }
        continue;
      }
      if (delta.norm() < tol.step * (x.norm() + tol.step)) {
        report.converged = true;
        report.reason = Termination::kStep;
        stalled = true;
        break;
      }
      const Eigen::VectorXd x_trial = x + delta;
      evaluate(x_trial, r_trial, nullptr);
      const double cost_trial = r_trial.squaredNorm();
      // Predicted decrease of the local quadratic model.
      const double predicted = -(2.0 * delta.dot(grad) + delta.dot(jtj * delta));
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double rho = predicted > 0.0 ? (cost - cost_trial) / predicted : 1.0;
        x = x_trial;
        cost = cost_trial;
        evaluate(x, r, &jac);
        report.accepted_costs.push_back(cost);
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        lambda = std::max(lambda, 1e-15);
        nu = 2.0;
        accepted = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e32) {
          report.reason = Termination::kNoProgress;
          stalled = true;
          break;
        }
      }
    }
    if (stalled) {
      break;
    }
  }
  report.final_cost = cost;
  return report;
}

}  // namespace mplan
