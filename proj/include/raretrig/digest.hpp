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

#ifndef RARETRIG_DIGEST_HPP_
#define RARETRIG_DIGEST_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace raretrig {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 (via the system crypto library).
Digest sha256(const std::uint8_t* data, std::size_t len);
Digest sha256(const std::vector<std::uint8_t>& data);

std::string digest_hex(const Digest& d);

}  // namespace raretrig

#endif  // RARETRIG_DIGEST_HPP_
