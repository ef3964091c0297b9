#pragma once

// Primitives shared by every codec: differential coding, prefix sums and
// tight fixed-width bit packing.
//
// Packed payloads are little-endian 32-bit words; value k occupies bits
// [k*b, k*b + b) of the stream, spilling into the next word when needed.
// Because words are little endian this is the same as an LSB-first bit
// stream over bytes, so payloads are truncated to ceil(n*b/8) bytes.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace packdb {

using Key = uint32_t;

// Number of bits per packed value, in [0, 32].
class BitWidth {
 public:
  constexpr BitWidth() = default;
  constexpr explicit BitWidth(uint32_t bits) : bits_(bits) {}
  constexpr uint32_t bits() const { return bits_; }
  constexpr bool admits(uint32_t v) const {
    return bits_ >= 32 || v < (uint32_t{1} << bits_);
  }
  friend constexpr bool operator==(BitWidth, BitWidth) = default;

 private:
  uint32_t bits_ = 0;
};

struct DeltaArray {
  std::vector<uint32_t> values;
  Key start = 0;
};

// out[i] = keys[i] - keys[i-1], with keys[-1] = start. Keys must be
// nondecreasing and keys[0] >= start.
DeltaArray compute_deltas(std::span<const Key> keys, Key start);
void compute_deltas(std::span<const Key> keys, Key start,
                    std::span<uint32_t> out);

// Inverse of compute_deltas.
std::vector<Key> prefix_sum(const DeltaArray& deltas);
void prefix_sum(std::span<const uint32_t> deltas, Key start,
                std::span<Key> out);

// Four-lane prefix sum: per group of four, shift by two lanes and add, then
// shift by one lane and add; the last lane is broadcast into the next group.
// deltas.size() must be a multiple of 4. Output is identical to prefix_sum.
std::vector<Key> prefix_sum_vector4(std::span<const uint32_t> deltas,
                                    Key start);
void prefix_sum_vector4(std::span<const uint32_t> deltas, Key start,
                        std::span<Key> out);

// In-place variant used by decoders; n must be a multiple of 4.
void prefix_sum_vector4_inplace(uint32_t* data, size_t n, Key start);

constexpr size_t packed_bytes(size_t n, uint32_t b) {
  return (n * b + 7) / 8;
}

// Minimal width such that every value is < 2^b.
BitWidth max_bits(std::span<const uint32_t> values);

constexpr uint32_t bits_for(uint32_t v) {
  uint32_t b = 0;
  while (b < 32 && (v >> b) != 0) ++b;
  return b;
}

std::vector<uint8_t> pack_bits(std::span<const uint32_t> values, BitWidth b);
void pack_bits(std::span<const uint32_t> values, BitWidth b,
               std::span<uint8_t> out);

std::vector<uint32_t> unpack_bits(std::span<const uint8_t> payload, size_t n,
                                  BitWidth b);
void unpack_bits(std::span<const uint8_t> payload, size_t n, BitWidth b,
                 uint32_t* out);

// Random access into a packed stream. The buffer must hold at least
// packed_bytes(index + 1, b) bytes.
uint32_t read_packed(std::span<const uint8_t> payload, size_t index,
                     uint32_t b);
// Overwrites one slot; the other bits are preserved.
void write_packed(std::span<uint8_t> payload, size_t index, uint32_t b,
                  uint32_t value);

// Fast path for one full 128-value group at width b (16*b bytes of input).
void unpack128(const uint8_t* in, uint32_t b, uint32_t* out);

inline uint32_t load_le32(const uint8_t* p) {
  return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) |
         (uint32_t{p[3]} << 24);
}

inline void store_le32(uint8_t* p, uint32_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
  p[2] = static_cast<uint8_t>(v >> 16);
  p[3] = static_cast<uint8_t>(v >> 24);
}

inline uint16_t load_le16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void store_le16(uint8_t* p, uint16_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
}

inline uint64_t load_le64(const uint8_t* p) {
  return uint64_t{load_le32(p)} | (uint64_t{load_le32(p + 4)} << 32);
}

inline void store_le64(uint8_t* p, uint64_t v) {
  store_le32(p, static_cast<uint32_t>(v));
  store_le32(p + 4, static_cast<uint32_t>(v >> 32));
}

}  // namespace packdb
