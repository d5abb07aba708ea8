// Copyright 2026 The nvloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NVLOOP_ERRORS_HPP_
#define NVLOOP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace nvloop {

// Violated precondition on an argument or configuration value. The message
// names the offending parameter.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that depend on the numerical values rather than on the
// static shape of the input (poles, clearance violations, degenerate
// objectives).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A lossless open-terminated line of electrical length k*pi, or a reflection
// coefficient evaluated at Zin = -Z0.
class ImpedancePole : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Field point closer to a filament than the bundle spacing.
class ClearanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// |Zin| does not vary with the phase-shifter setting.
class FlatObjective : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Finite pi pulses do not fit inside the pulse spacing.
class PulsesOverlap : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace nvloop

#endif  // NVLOOP_ERRORS_HPP_
