/*
 Copyright 2026 The ddpc Authors

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
#pragma once

#include <stdexcept>
#include <string>

namespace ddpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or sequence sizes incompatible with an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or invalid scalar arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Random system generation ran out of attempts.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// An internal identity that must hold did not (e.g. a negative gap).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A simulator-only diagnostic was requested from data that lacks it.
class DiagnosticUnavailable : public Error {
 public:
  using Error::Error;
};

/// Empirical input covariance is singular.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// Kernel order too small for the system.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem tied to a named key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ddpc
