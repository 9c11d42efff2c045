// Copyright 2026 The axpath Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace axpath {

/// Bad user input: malformed files, out-of-range ids, dimension mismatches.
/// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant was violated (completeness, divergence, NaN).
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path enumeration exceeded the configured cap.
class PathCapExceeded : public std::runtime_error {
 public:
  PathCapExceeded(std::size_t cap)
      : std::runtime_error("path count exceeds cap of " + std::to_string(cap)),
        cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

/// Target whose base KL divergence is below the ratio floor.
class DegenerateTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace axpath
