#include "packdb/kernels.h"

#include <algorithm>
#include <array>
#include <bit>
#include <string>
#include <utility>

#include "packdb/error.h"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace packdb {

namespace {

constexpr uint32_t low_mask(uint32_t b) {
  return b >= 32 ? 0xFFFFFFFFu : ((uint32_t{1} << b) - 1);
}

uint64_t load_bounded(const uint8_t* p, size_t avail) {
  uint64_t v = 0;
  const size_t n = std::min<size_t>(avail, 8);
  for (size_t i = 0; i < n; ++i) v |= uint64_t{p[i]} << (8 * i);
  return v;
}

template <uint32_t B, size_t J>
inline uint32_t extract(const uint32_t* w) {
  constexpr size_t bit = J * B;
  constexpr size_t word = bit / 32;
  constexpr uint32_t off = bit % 32;
  uint32_t v = w[word] >> off;
  if constexpr (off + B > 32) v |= w[word + 1] << (32 - off);
  if constexpr (B < 32) v &= (uint32_t{1} << B) - 1;
  return v;
}

template <uint32_t B, size_t... J>
inline void unpack128_seq(const uint32_t* w, uint32_t* out,
                          std::index_sequence<J...>) {
  ((out[J] = extract<B, J>(w)), ...);
}

template <uint32_t B>
void unpack128_fixed(const uint8_t* in, uint32_t* out) {
  if constexpr (B == 0) {
    std::fill_n(out, 128, 0u);
  } else {
    uint32_t w[4 * B];
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(w, in, sizeof(w));
    } else {
      for (uint32_t i = 0; i < 4 * B; ++i) w[i] = load_le32(in + 4 * i);
    }
    unpack128_seq<B>(w, out, std::make_index_sequence<128>{});
  }
}

using Unpack128Fn = void (*)(const uint8_t*, uint32_t*);

template <size_t... B>
constexpr std::array<Unpack128Fn, sizeof...(B)> make_unpack_table(
    std::index_sequence<B...>) {
  return {&unpack128_fixed<static_cast<uint32_t>(B)>...};
}

constexpr auto kUnpack128 = make_unpack_table(std::make_index_sequence<33>{});

}  // namespace

DeltaArray compute_deltas(std::span<const Key> keys, Key start) {
  DeltaArray d;
  d.start = start;
  d.values.resize(keys.size());
  compute_deltas(keys, start, d.values);
  return d;
}

void compute_deltas(std::span<const Key> keys, Key start,
                    std::span<uint32_t> out) {
  if (out.size() < keys.size()) contract_violation("delta buffer too small");
  Key prev = start;
  for (size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] < prev) {
      contract_violation("compute_deltas: keys not sorted at index " +
                         std::to_string(i));
    }
    out[i] = keys[i] - prev;
    prev = keys[i];
  }
}

std::vector<Key> prefix_sum(const DeltaArray& deltas) {
  std::vector<Key> out(deltas.values.size());
  prefix_sum(deltas.values, deltas.start, out);
  return out;
}

void prefix_sum(std::span<const uint32_t> deltas, Key start,
                std::span<Key> out) {
  Key acc = start;
  for (size_t i = 0; i < deltas.size(); ++i) {
    acc += deltas[i];
    out[i] = acc;
  }
}

std::vector<Key> prefix_sum_vector4(std::span<const uint32_t> deltas,
                                    Key start) {
  std::vector<Key> out(deltas.size());
  prefix_sum_vector4(deltas, start, out);
  return out;
}

void prefix_sum_vector4(std::span<const uint32_t> deltas, Key start,
                        std::span<Key> out) {
  if (deltas.size() % 4 != 0) {
    contract_violation("prefix_sum_vector4: length must be a multiple of 4");
  }
  if (out.size() < deltas.size()) contract_violation("output too small");
  std::copy(deltas.begin(), deltas.end(), out.begin());
  prefix_sum_vector4_inplace(out.data(), deltas.size(), start);
}

void prefix_sum_vector4_inplace(uint32_t* data, size_t n, Key start) {
#if defined(__SSE2__)
  __m128i carry = _mm_set1_epi32(static_cast<int>(start));
  for (size_t i = 0; i < n; i += 4) {
    auto* p = reinterpret_cast<__m128i*>(data + i);
    __m128i v = _mm_loadu_si128(p);
    v = _mm_add_epi32(v, _mm_slli_si128(v, 8));
    v = _mm_add_epi32(v, _mm_slli_si128(v, 4));
    v = _mm_add_epi32(v, carry);
    _mm_storeu_si128(p, v);
    carry = _mm_shuffle_epi32(v, 0xFF);
  }
#else
  uint32_t carry = start;
  for (size_t i = 0; i < n; i += 4) {
    uint32_t* v = data + i;
    // shift by two lanes, add
    const uint32_t a0 = v[0], a1 = v[1], a2 = v[2] + v[0], a3 = v[3] + v[1];
    // shift by one lane, add
    v[0] = a0 + carry;
    v[1] = a1 + a0 + carry;
    v[2] = a2 + a1 + carry;
    v[3] = a3 + a2 + carry;
    carry = v[3];
  }
#endif
}

BitWidth max_bits(std::span<const uint32_t> values) {
  uint32_t acc = 0;
  for (uint32_t v : values) acc |= v;
  return BitWidth(bits_for(acc));
}

std::vector<uint8_t> pack_bits(std::span<const uint32_t> values, BitWidth b) {
  std::vector<uint8_t> out(packed_bytes(values.size(), b.bits()));
  pack_bits(values, b, out);
  return out;
}

void pack_bits(std::span<const uint32_t> values, BitWidth b,
               std::span<uint8_t> out) {
  const uint32_t bits = b.bits();
  if (bits > 32) contract_violation("pack_bits: width above 32");
  const size_t need = packed_bytes(values.size(), bits);
  if (out.size() < need) contract_violation("pack_bits: output too small");
  std::fill_n(out.begin(), need, uint8_t{0});
  if (bits == 0) {
    for (uint32_t v : values) {
      if (v != 0) contract_violation("pack_bits: value does not fit width 0");
    }
    return;
  }
  uint64_t acc = 0;
  uint32_t filled = 0;
  size_t pos = 0;
  for (uint32_t v : values) {
    if (!b.admits(v)) {
      contract_violation("pack_bits: value " + std::to_string(v) +
                         " does not fit width " + std::to_string(bits));
    }
    acc |= uint64_t{v} << filled;
    filled += bits;
    while (filled >= 8) {
      out[pos++] = static_cast<uint8_t>(acc);
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0) out[pos++] = static_cast<uint8_t>(acc);
}

std::vector<uint32_t> unpack_bits(std::span<const uint8_t> payload, size_t n,
                                  BitWidth b) {
  std::vector<uint32_t> out(n);
  unpack_bits(payload, n, b, out.data());
  return out;
}

void unpack_bits(std::span<const uint8_t> payload, size_t n, BitWidth b,
                 uint32_t* out) {
  const uint32_t bits = b.bits();
  if (bits > 32) throw CorruptionError("unpack_bits: width above 32");
  if (payload.size() < packed_bytes(n, bits)) {
    throw CorruptionError("unpack_bits: payload holds " +
                          std::to_string(payload.size()) + " bytes, need " +
                          std::to_string(packed_bytes(n, bits)));
  }
  size_t i = 0;
  const uint8_t* p = payload.data();
  // Whole 128-value groups go through the unrolled kernels.
  for (; i + 128 <= n; i += 128) {
    kUnpack128[bits](p, out + i);
    p += 16 * bits;
  }
  if (i == n) return;
  const uint32_t mask = low_mask(bits);
  uint64_t acc = 0;
  uint32_t have = 0;
  for (; i < n; ++i) {
    while (have < bits) {
      acc |= uint64_t{*p++} << have;
      have += 8;
    }
    out[i] = static_cast<uint32_t>(acc) & mask;
    acc >>= bits;
    have -= bits;
  }
}

uint32_t read_packed(std::span<const uint8_t> payload, size_t index,
                     uint32_t b) {
  if (b == 0) return 0;
  const size_t bit = index * b;
  const size_t byte = bit / 8;
  const uint32_t shift = static_cast<uint32_t>(bit % 8);
  const uint64_t window =
      load_bounded(payload.data() + byte, payload.size() - byte);
  return static_cast<uint32_t>(window >> shift) & low_mask(b);
}

void write_packed(std::span<uint8_t> payload, size_t index, uint32_t b,
                  uint32_t value) {
  if (b == 0) {
    if (value != 0) contract_violation("write_packed: value exceeds width");
    return;
  }
  if (b < 32 && (value >> b) != 0) {
    contract_violation("write_packed: value exceeds width");
  }
  const size_t bit = index * b;
  const size_t byte = bit / 8;
  const uint32_t shift = static_cast<uint32_t>(bit % 8);
  const size_t touched = (shift + b + 7) / 8;
  if (byte + touched > payload.size()) {
    contract_violation("write_packed: payload too small");
  }
  uint64_t window = load_bounded(payload.data() + byte, touched);
  const uint64_t mask = uint64_t{low_mask(b)} << shift;
  window = (window & ~mask) | (uint64_t{value} << shift);
  for (size_t i = 0; i < touched; ++i) {
    payload[byte + i] = static_cast<uint8_t>(window >> (8 * i));
  }
}

void unpack128(const uint8_t* in, uint32_t b, uint32_t* out) {
  kUnpack128[b](in, out);
}

}  // namespace packdb
