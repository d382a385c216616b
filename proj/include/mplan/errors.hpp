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

#ifndef MPLAN_ERRORS_HPP_
#define MPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mplan
{

/// Raised when a planning primitive receives input outside its contract.
class PlanningError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Scenario validation failure. `field()` is a JSON-style path such as
/// "lanes[0].width".
class ScenarioError : public std::runtime_error
{
public:
  ScenarioError(std::string field, const std::string & message)
  : std::runtime_error(field + ": " + message), field_(std::move(field))
  {
  }

  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace mplan

#endif  // MPLAN_ERRORS_HPP_
