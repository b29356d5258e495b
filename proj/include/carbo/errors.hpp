// Copyright 2026 The carbo Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <stdexcept>
#include <string>

namespace carbo {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value lies outside its declared domain (bounds, category set, sign).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A document or vector does not have the expected shape or fields.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Input data is unusable (non-finite, nonpositive cost, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A factorization or solve failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// An operation was called on an object in the wrong state.
class StateError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// The external evaluator cannot be started or has gone away for good.
class EvaluatorUnavailable : public Error {
 public:
  using Error::Error;
};

void log_warning(const std::string& message);

}  // namespace carbo
