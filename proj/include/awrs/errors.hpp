// Copyright 2026 The awrs Authors.
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

#ifndef AWRS_ERRORS_HPP
#define AWRS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace awrs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable name, e.g. "AllDead".
  [[nodiscard]] virtual const char* kind() const noexcept = 0;
};

#define AWRS_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    [[nodiscard]] const char* kind() const noexcept override { return #Name; } \
  };

/// Every weight passed to normalization (or left after a removal) is zero.
AWRS_DEFINE_ERROR(AllZeroMass)
/// A local constraint admits no token with positive prior mass.
AWRS_DEFINE_ERROR(NoValidToken)
/// A generation step reached a prefix with no valid continuation.
AWRS_DEFINE_ERROR(DeadPrefix)
/// No string satisfies the sequence-level constraint.
AWRS_DEFINE_ERROR(EmptyPosterior)
/// Every particle carries zero weight.
AWRS_DEFINE_ERROR(AllDead)
/// A prefix is longer than the model's maximum length.
AWRS_DEFINE_ERROR(PrefixTooLong)
/// An exact enumeration would exceed its size limits.
AWRS_DEFINE_ERROR(EnumerationLimit)
/// Malformed model, language, pattern or run description.
AWRS_DEFINE_ERROR(ConfigError)

#undef AWRS_DEFINE_ERROR

}  // namespace awrs

#endif
