// Copyright 2026 The fpmcorr Authors. All Rights Reserved.
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

#ifndef FPM_ERROR_HPP_
#define FPM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fpm {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid dimensions incompatible with the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

// LED index outside the configured array.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Physically or numerically invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or malformed input data.
class InputError : public Error {
 public:
  using Error::Error;
};

// A wave vector pushes the spectrum tile off the high-resolution grid.
class OutOfBandError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpm

#endif  // FPM_ERROR_HPP_
