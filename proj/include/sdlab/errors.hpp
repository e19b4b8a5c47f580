// Copyright 2026 The sdlab Authors
// SPDX-License-Identifier: Apache-2.0
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
#pragma once

#include <stdexcept>
#include <string>

namespace sdlab {

// Precondition violations on values (token out of range, invalid
// distribution, undefined residual, empty prompt list).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A non-finite value reached a parameter update.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible components, e.g. target and draft with different vocabs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training diverged or failed to reach its convergence target.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed config, checkpoint, dataset, prompt or CSV file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage (missing arguments and the like).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal contract (e.g. a draft proposed a zero-probability token).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sdlab
