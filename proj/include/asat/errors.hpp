/*
 * Copyright 2026 The ASAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ASAT_ERRORS_HPP_
#define ASAT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace asat {

// Base class for every error raised by the library. The CLI maps each
// category to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition on a parameter value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Index or rank outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An operation that needs at least one element received none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Malformed or schema-incompatible input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace asat

#endif  // ASAT_ERRORS_HPP_
