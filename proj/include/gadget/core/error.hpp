// Copyright 2026 The Gadget Authors
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

#ifndef GADGET_CORE_ERROR_HPP
#define GADGET_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gadget {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant or precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable, corrupt, or not writable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Lookup of an id that does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

/// Operation is valid in general but not in the current state.
class Conflict : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN or infinite objective.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gadget

#endif  // GADGET_CORE_ERROR_HPP
