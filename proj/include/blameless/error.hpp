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

#ifndef BLAMELESS_ERROR_HPP
#define BLAMELESS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace blameless {

enum class ErrorKind {
  DegenerateInput,
  Unbounded,
  Empty,
  NotNested,
  BoundaryOverlap,
  DegenerateTriangle,
  ValidationFailure,
  OutsideDomain,
  IllConditioned,
  NoBlamelessSolution,
  InfeasibleStage2,
  SolverFailure,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::NotNested: return "NotNested";
    case ErrorKind::BoundaryOverlap: return "BoundaryOverlap";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::ValidationFailure: return "ValidationFailure";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NoBlamelessSolution: return "NoBlamelessSolution";
    case ErrorKind::InfeasibleStage2: return "InfeasibleStage2";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace blameless

#endif  // BLAMELESS_ERROR_HPP
