// Copyright 2026 The Sculpt Authors
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

namespace sculpt {

/// Gate references a qubit outside the register, or is malformed.
class InvalidGateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector/matrix extents disagree with what the operation expects.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. non-symmetric input).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input files, datasets and checkpoints that cannot be used.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures. The CLI maps every subclass to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every eigenvalue fell below the filtering floor.
class DegenerateSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Meta-training saw a degenerate metric for too many consecutive steps.
class BarrenPlateauError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sculpt
