// Copyright 2026 The BPTTS Authors
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

#ifndef BPTTS_ERROR_H_
#define BPTTS_ERROR_H_

#include <stdexcept>
#include <string>

namespace bptts {

// Invalid arguments, malformed configuration, unknown names.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Arithmetic outside an operation's domain (division by zero, sqrt of a
// negative number, non-finite leaf).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or mismatched checkpoint / data file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite activations inside the policy network.
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The simulated state left the admissible set (non-finite values, or
// nonpositive density/pressure for Euler) during step `step`.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(int step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace bptts

#endif  // BPTTS_ERROR_H_
