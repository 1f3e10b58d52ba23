// Copyright 2026 The raretrig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RARETRIG_RESULT_HPP_
#define RARETRIG_RESULT_HPP_

#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <variant>

namespace raretrig {

// Minimal value-or-error carrier for recoverable failures (malformed input
// files, partial frames, non-halting reference runs). Contract violations
// throw instead; see the individual module headers.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    if (!ok()) throw std::logic_error("Result::value() on error result");
    return std::get<0>(v_);
  }
  const T& value() const& {
    if (!ok()) throw std::logic_error("Result::value() on error result");
    return std::get<0>(v_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Result::value() on error result");
    return std::get<0>(std::move(v_));
  }

  const E& error() const {
    if (ok()) throw std::logic_error("Result::error() on ok result");
    return std::get<1>(v_);
  }

 private:
  std::variant<T, E> v_;
};

}  // namespace raretrig

#endif  // RARETRIG_RESULT_HPP_
