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

#ifndef MPLAN_LEAST_SQUARES_HPP_
#define MPLAN_LEAST_SQUARES_HPP_

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "mplan/config.hpp"

namespace mplan
{

/// Evaluates residuals r(x); fills the Jacobian when `jac` is non-null.
using ResidualFunction =
  std::function<void(const Eigen::VectorXd & x, Eigen::VectorXd & r, Eigen::MatrixXd * jac)>;

struct LeastSquaresProblem
{
  int num_residuals{0};
  ResidualFunction residuals;
  bool analytic_jacobian{true};  // false: central finite differences
};

enum class Termination
{
  kGradient,
  kStep,
  kMaxIterations,
  kNoProgress,
};

struct SolveReport
{
  int iterations{0};
  double initial_cost{0.0};  // sum of squared residuals
  double final_cost{0.0};
  bool converged{false};
  Termination reason{Termination::kMaxIterations};
  std::vector<double> accepted_costs;  // cost after every accepted step
};

const char * to_string(Termination t);

/// Central-difference Jacobian of `fn` at x.
Eigen::MatrixXd numeric_jacobian(
  const ResidualFunction & fn, const Eigen::VectorXd & x, int num_residuals, double h = 1e-6);

/**
 * Levenberg-Marquardt minimization of sum(r_i^2) starting from `x` (updated
 * in place). Damping is multiplicative on the Gauss-Newton diagonal and is
 * raised until the damped normal equations factor. Only strictly improving
 * steps are accepted, so the cost sequence never increases.
 */
SolveReport damped_least_squares(
  const LeastSquaresProblem & problem, Eigen::VectorXd & x, const SolverTolerances & tol);

}  // namespace mplan

#endif  // MPLAN_LEAST_SQUARES_HPP_
