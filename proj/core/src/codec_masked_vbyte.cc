#include "masked_vbyte_tables.h"
#include "vbyte_codec.h"

#if defined(__SSE4_1__)
#include <smmintrin.h>
#endif

namespace packdb::detail {

namespace {

#if defined(__SSE4_1__)

inline __m128i prefix4(__m128i v, __m128i carry) {
  v = _mm_add_epi32(v, _mm_slli_si128(v, 8));
  v = _mm_add_epi32(v, _mm_slli_si128(v, 4));
  return _mm_add_epi32(v, carry);
}

inline __m128i emit4(__m128i v, __m128i carry, Key* out) {
  v = prefix4(v, carry);
  _mm_storeu_si128(reinterpret_cast<__m128i*>(out), v);
  return _mm_shuffle_epi32(v, 0xFF);
}

#endif

// Decodes n deltas and writes their running sum starting from `start`.
// Returns the number of payload bytes consumed.
size_t masked_decode(const uint8_t* in, size_t in_len, uint32_t n, Key start,
                     Key* out) {
  const uint8_t* p = in;
  const uint8_t* end = in + in_len;
  uint32_t i = 0;
  Key acc = start;
#if defined(__SSE4_1__)
  __m128i carry = _mm_set1_epi32(static_cast<int>(start));
  const __m128i m7f16 = _mm_set1_epi16(0x007F);
  const __m128i mhi16 = _mm_set1_epi16(0x7F00);
  const __m128i m0 = _mm_set1_epi32(0x0000007F);
  const __m128i m1 = _mm_set1_epi32(0x00007F00);
  const __m128i m2 = _mm_set1_epi32(0x007F0000);
  const __m128i m3 = _mm_set1_epi32(0x7F000000);
  const __m128i zero = _mm_setzero_si128();
  while (n - i >= 16 && end - p >= 16) {
    const __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
    const auto mask = static_cast<uint32_t>(_mm_movemask_epi8(v));
    if (mask == 0) {
      // Sixteen single-byte values.
      carry = emit4(_mm_cvtepu8_epi32(v), carry, out + i);
      carry = emit4(_mm_cvtepu8_epi32(_mm_srli_si128(v, 4)), carry, out + i + 4);
      carry = emit4(_mm_cvtepu8_epi32(_mm_srli_si128(v, 8)), carry, out + i + 8);
      carry = emit4(_mm_cvtepu8_epi32(_mm_srli_si128(v, 12)), carry, out + i + 12);
      p += 16;
      i += 16;
      continue;
    }
    const MaskedEntry& e = kMaskedTable[mask & 0xFFF];
    if (e.mode == MaskedMode::kLanes16) {
      const __m128i s = _mm_shuffle_epi8(
          v, _mm_loadu_si128(reinterpret_cast<const __m128i*>(e.shuffle.data())));
      const __m128i val = _mm_or_si128(
          _mm_and_si128(s, m7f16), _mm_srli_epi16(_mm_and_si128(s, mhi16), 1));
      carry = emit4(_mm_unpacklo_epi16(val, zero), carry, out + i);
      carry = emit4(_mm_unpackhi_epi16(val, zero), carry, out + i + 4);
      p += e.consumed;
      i += e.count;
    } else if (e.mode == MaskedMode::kLanes32) {
      const __m128i s = _mm_shuffle_epi8(
          v, _mm_loadu_si128(reinterpret_cast<const __m128i*>(e.shuffle.data())));
      const __m128i val = _mm_or_si128(
          _mm_or_si128(_mm_and_si128(s, m0),
                       _mm_srli_epi32(_mm_and_si128(s, m1), 1)),
          _mm_or_si128(_mm_srli_epi32(_mm_and_si128(s, m2), 2),
                       _mm_srli_epi32(_mm_and_si128(s, m3), 3)));
      carry = emit4(val, carry, out + i);
      p += e.consumed;
      i += e.count;
    } else {
      uint32_t d;
      p = vbyte_get(p, end, d);
      const Key x = static_cast<Key>(_mm_cvtsi128_si32(carry)) + d;
      out[i++] = x;
      carry = _mm_set1_epi32(static_cast<int>(x));
    }
  }
  acc = static_cast<Key>(_mm_cvtsi128_si32(carry));
#endif
  for (; i < n; ++i) {
    uint32_t d;
    if (p < end && *p < 0x80) {
      d = *p++;
    } else {
      p = vbyte_get(p, end, d);
    }
    acc += d;
    out[i] = acc;
  }
  return static_cast<size_t>(p - in);
}

// Same byte format as VByte; decoding gathers continuation bits and
// shuffles whole groups of values into vector lanes.
class MaskedVByteCodec final : public VByteCodec {
 public:
  CodecId id() const override { return CodecId::kMaskedVByte; }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    masked_decode(payload.data(), payload.size(), info.n, info.start,
                  out.data());
  }

  // Decodes the prefix of values up to and including the rounded-up group
  // of four holding index i.
  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override {
    if (i >= info.n) contract_violation("select: index out of range");
    DecodeBuffer tmp;
    const uint32_t want = std::min(info.n, (i / 4 + 1) * 4);
    masked_decode(payload.data(), payload.size(), want, info.start,
                  tmp.data());
    return tmp[i];
  }

  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override {
    if (info.n == 0 || target > info.last) return std::nullopt;
    DecodeBuffer tmp;
    masked_decode(payload.data(), payload.size(), info.n, info.start,
                  tmp.data());
    for (uint32_t j = 0; j < info.n; ++j) {
      if (tmp[j] >= target) return Hit{j, tmp[j]};
    }
    throw CorruptionError("maskedvbyte: cached last key not found in block");
  }
};

}  // namespace

const Codec& masked_vbyte_codec() {
  static const MaskedVByteCodec instance;
  return instance;
}

}  // namespace packdb::detail
