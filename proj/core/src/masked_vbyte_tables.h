#pragma once

// Shuffle tables for the masked VByte decoder, generated at compile time.
//
// The decoder loads 16 payload bytes and gathers their high (continuation)
// bits into a 16-bit mask. The low 12 bits of that mask index this table.
// Each entry describes how many complete values starting at byte 0 can be
// decoded with one byte shuffle, and in which lane layout:
//
//   kLanes16: up to 8 values of 1 or 2 bytes, one per 16-bit lane
//   kLanes32: up to 4 values of 1 to 4 bytes, one per 32-bit lane
//   kScalar:  the first value is 5 bytes long; decode it without shuffling
//
// Generation walks the mask: a value ends at the first byte whose bit is 0.
// Values whose last byte lies beyond byte 11 are not considered. The layout
// that decodes more values wins; ties go to 16-bit lanes. Shuffle indexes of
// 0x80 produce zero bytes, so unused lanes and missing high bytes read as 0.

#include <array>
#include <cstdint>

namespace packdb::detail {

enum class MaskedMode : uint8_t { kScalar = 0, kLanes16 = 1, kLanes32 = 2 };

struct MaskedEntry {
  std::array<uint8_t, 16> shuffle{};
  uint8_t count = 0;
  uint8_t consumed = 0;
  MaskedMode mode = MaskedMode::kScalar;
};

constexpr MaskedEntry make_masked_entry(uint32_t mask) {
  uint8_t lens[12] = {};
  uint8_t starts[12] = {};
  uint32_t k = 0;
  uint32_t pos = 0;
  while (pos < 12) {
    uint32_t p = pos;
    while (p < 12 && ((mask >> p) & 1u) != 0) ++p;
    if (p >= 12) break;
    starts[k] = static_cast<uint8_t>(pos);
    lens[k] = static_cast<uint8_t>(p - pos + 1);
    ++k;
    pos = p + 1;
  }
  uint32_t c16 = 0;
  while (c16 < k && c16 < 8 && lens[c16] <= 2) ++c16;
  uint32_t c32 = 0;
  while (c32 < k && c32 < 4 && lens[c32] <= 4) ++c32;

  MaskedEntry e;
  for (auto& s : e.shuffle) s = 0x80;
  if (c16 == 0 && c32 == 0) return e;
  uint32_t consumed = 0;
  if (c16 >= c32) {
    e.mode = MaskedMode::kLanes16;
    e.count = static_cast<uint8_t>(c16);
    for (uint32_t j = 0; j < c16; ++j) {
      e.shuffle[2 * j] = starts[j];
      if (lens[j] == 2) e.shuffle[2 * j + 1] = static_cast<uint8_t>(starts[j] + 1);
      consumed += lens[j];
    }
  } else {
    e.mode = MaskedMode::kLanes32;
    e.count = static_cast<uint8_t>(c32);
    for (uint32_t j = 0; j < c32; ++j) {
      for (uint32_t b = 0; b < lens[j]; ++b) {
        e.shuffle[4 * j + b] = static_cast<uint8_t>(starts[j] + b);
      }
      consumed += lens[j];
    }
  }
  e.consumed = static_cast<uint8_t>(consumed);
  return e;
}

constexpr std::array<MaskedEntry, 4096> make_masked_table() {
  std::array<MaskedEntry, 4096> table{};
  for (uint32_t m = 0; m < 4096; ++m) table[m] = make_masked_entry(m);
  return table;
}

inline constexpr std::array<MaskedEntry, 4096> kMaskedTable =
    make_masked_table();

// Spot checks on the generator.
static_assert(kMaskedTable[0].mode == MaskedMode::kLanes16 &&
              kMaskedTable[0].count == 8 && kMaskedTable[0].consumed == 8);
// 0b0101: two 2-byte values followed by 1-byte values.
static_assert(kMaskedTable[0b0101].count == 8 &&
              kMaskedTable[0b0101].consumed == 10 &&
              kMaskedTable[0b0101].shuffle[1] == 1 &&
              kMaskedTable[0b0101].shuffle[3] == 3);
// 0b1111: a 5-byte value first.
static_assert(kMaskedTable[0b1111].mode == MaskedMode::kScalar);
// 0b0011: a 3-byte value first forces 32-bit lanes.
static_assert(kMaskedTable[0b0011].mode == MaskedMode::kLanes32 &&
              kMaskedTable[0b0011].count == 4);

}  // namespace packdb::detail
