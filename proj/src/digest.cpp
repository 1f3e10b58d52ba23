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

#include "raretrig/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace raretrig {

Digest sha256(const std::uint8_t* data, std::size_t len) {
  Digest out{};
  unsigned int written = 0;
  if (EVP_Digest(data, len, out.data(), &written, EVP_sha256(), nullptr) != 1 ||
      written != out.size())
    throw std::runtime_error("SHA-256 digest computation failed");
  return out;
}

Digest sha256(const std::vector<std::uint8_t>& data) {
  return sha256(data.data(), data.size());
}

std::string digest_hex(const Digest& d) {
  static const char* hexdig = "0123456789abcdef";
  std::string s;
  s.reserve(d.size() * 2);
  for (std::uint8_t b : d) {
    s.push_back(hexdig[b >> 4]);
    s.push_back(hexdig[b & 0xf]);
  }
  return s;
}

}  // namespace raretrig
