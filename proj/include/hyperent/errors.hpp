// Copyright 2026 The hyperent Authors
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

namespace hyperent {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Parameter outside its documented range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Matrix that violates the density-operator invariants.
class InvalidState : public Error {
 public:
  using Error::Error;
};

// Analyzer configuration for which Franson post-selection is not valid.
class FransonInvalid : public Error {
 public:
  using Error::Error;
};

class MissingData : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-range campaign configuration.  The message names the
// file and line (syntax errors) or the field path (schema errors).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperent
