#ifndef RARETRIG_TESTS_PACKING_HPP_
#define RARETRIG_TESTS_PACKING_HPP_

#include <cstdint>
#include <vector>

#include "raretrig/dut.hpp"

namespace raretrig::testing {

// Bits of input the design actually reads per frame (declared widths, not
// the byte-padded frame size).
inline std::uint32_t effective_bits_per_frame(const Dut& dut) {
  std::uint32_t bits = 0;
  for (const auto& in : dut.inputs) bits += in.width;
  return bits;
}

// Canonical byte image of an effective-input value: frame by frame, inputs
// in declaration order, each taking its `width` low bits of v. Padding bits
// above a declared width stay zero (execution masks them off anyway), so
// the map is injective over [0, 2^(frames * effective_bits_per_frame)).
inline std::vector<std::uint8_t> pack_effective(const Dut& dut,
                                                std::uint32_t frames,
                                                std::uint64_t v) {
  std::vector<std::uint8_t> bytes(std::size_t(frames) * dut.frame_bytes, 0);
  for (std::uint32_t c = 0; c < frames; ++c) {
    for (std::size_t i = 0; i < dut.inputs.size(); ++i) {
      const unsigned w = dut.inputs[i].width;
      const std::uint64_t val = v & width_mask(w);
      v >>= w;
      const std::size_t off =
          std::size_t(c) * dut.frame_bytes + dut.input_byte_off[i];
      for (unsigned b = 0; b < (w + 7u) / 8u; ++b)
        bytes[off + b] = static_cast<std::uint8_t>(val >> (8 * b));
    }
  }
  return bytes;
}

}  // namespace raretrig::testing

#endif  // RARETRIG_TESTS_PACKING_HPP_
