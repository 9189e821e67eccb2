// Copyright 2026 The gradflux Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gradflux {

/// Invalid caller input: out-of-range parameters, malformed files, unknown
/// configuration keys. The CLI maps these to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A circuit whose reduction hits a vanishing denominator. `quantity` names
/// the expression that vanished.
class DegenerateCircuitError : public InputError {
 public:
  explicit DegenerateCircuitError(std::string quantity)
      : InputError("degenerate circuit: " + quantity + " vanishes"),
        quantity_(std::move(quantity)) {}
  const std::string& quantity() const noexcept { return quantity_; }

 private:
  std::string quantity_;
};

/// Numerical failure: eigensolver errors, optimizer non-convergence. The CLI
/// maps these to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gradflux
