#include "codec_impl.h"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace packdb::detail {

namespace {

// Frame of reference: keys[i] - keys[0] packed at the width of the block's
// range, no differential coding. start is the frame base (keys[0]); only
// the n present values are packed. meta holds the bit width.
class ForCodec : public RecompressingCodec {
 public:
  CodecId id() const override { return CodecId::kFor; }
  bool meta_is_bit_width() const override { return true; }
  bool repack_on_vacuumize() const override { return true; }

  uint32_t payload_bytes(const BlockInfo& info) const override {
    return static_cast<uint32_t>(packed_bytes(info.n, info.meta));
  }
  uint32_t max_payload_bytes(uint32_t n) const override { return 4 * n; }

  uint32_t encoded_size(std::span<const Key> keys, Key) const override {
    return static_cast<uint32_t>(
        packed_bytes(keys.size(), bits_for(keys.back() - keys.front())));
  }

  BlockInfo compress(std::span<const Key> keys, Key,
                     std::span<uint8_t> out) const override {
    const auto n = static_cast<uint32_t>(keys.size());
    const Key base = keys.front();
    const uint32_t b = bits_for(keys.back() - base);
    check_capacity(out, static_cast<uint32_t>(packed_bytes(n, b)));
    uint32_t offsets[kMaxBlockKeys];
    for (uint32_t i = 0; i < n; ++i) offsets[i] = keys[i] - base;
    pack_bits(std::span<const uint32_t>(offsets, n), BitWidth(b), out);
    return {n, b, base, keys.back()};
  }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    const uint32_t b = info.meta;
    if (b > 32) throw CorruptionError("for: bit width above 32");
    if (payload.size() < payload_bytes(info)) {
      throw CorruptionError("for: short payload");
    }
    const uint64_t mask = b >= 32 ? 0xFFFFFFFFull : ((1ull << b) - 1);
    const uint8_t* p = payload.data();
    uint64_t acc = 0;
    uint32_t have = 0;
    for (uint32_t i = 0; i < info.n; ++i) {
      while (have < b) {
        acc |= uint64_t{*p++} << have;
        have += 8;
      }
      out[i] = info.start + static_cast<uint32_t>(acc & mask);
      acc >>= b;
      have -= b;
    }
  }

  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override {
    if (i >= info.n) contract_violation("select: index out of range");
    return info.start + read_packed(payload, i, info.meta);
  }

  // Binary search over the packed offsets.
  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override {
    if (info.n == 0 || target > info.last) return std::nullopt;
    if (target <= info.start) return Hit{0, info.start};
    const uint32_t t = target - info.start;
    uint32_t lo = 0, hi = info.n;
    while (lo < hi) {
      const uint32_t mid = (lo + hi) / 2;
      if (read_packed(payload, mid, info.meta) < t) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return Hit{lo, info.start + read_packed(payload, lo, info.meta)};
  }

  InsertOutcome insert(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const override {
    if (info.n > 0 && key > info.last && info.n < kMaxBlockKeys) {
      const bool in_place = append_in_place(info, buf, key);
      return {true, info.n - 1,
              in_place ? InsertPath::kAppend : InsertPath::kRecompress};
    }
    return recompress_insert(info, buf, key);
  }

  void append(BlockInfo& info, std::span<uint8_t> buf,
              Key key) const override {
    check_append(info, key);
    if (info.n == 0) {
      insert_into_empty(info, buf, key);
      return;
    }
    append_in_place(info, buf, key);
  }

  uint32_t estimate_growth(const BlockInfo& info, std::span<const uint8_t>,
                           Key key) const override {
    if (info.n == 0) return 0;
    const Key lo = std::min(info.start, key);
    const Key hi = std::max(info.last, key);
    const uint32_t b = std::max(info.meta, bits_for(hi - lo));
    return static_cast<uint32_t>(packed_bytes(info.n + 1, b)) -
           payload_bytes(info);
  }

 private:
  bool append_in_place(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const {
    const uint32_t offset = key - info.start;
    const uint32_t b = info.meta;
    if (!BitWidth(b).admits(offset)) {
      recompress_insert(info, buf, key);
      return false;
    }
    const uint32_t old_bytes = payload_bytes(info);
    const auto new_bytes = static_cast<uint32_t>(packed_bytes(info.n + 1, b));
    check_capacity(buf, new_bytes);
    if (new_bytes > old_bytes) {
      std::fill(buf.begin() + old_bytes, buf.begin() + new_bytes, uint8_t{0});
    }
    write_packed(buf.first(new_bytes), info.n, b, offset);
    ++info.n;
    info.last = key;
    return true;
  }
};

// Same payload as FOR; full 128-value groups are unpacked by the unrolled
// kernels and rebased four lanes at a time.
class SimdForCodec final : public ForCodec {
 public:
  CodecId id() const override { return CodecId::kSimdFor; }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    const uint32_t b = info.meta;
    if (b > 32) throw CorruptionError("simdfor: bit width above 32");
    unpack_bits(payload, info.n, BitWidth(b), out.data());
    const uint32_t n4 = (info.n + 3) & ~3u;
#if defined(__SSE2__)
    const __m128i base = _mm_set1_epi32(static_cast<int>(info.start));
    for (uint32_t i = 0; i < n4; i += 4) {
      auto* p = reinterpret_cast<__m128i*>(out.data() + i);
      _mm_storeu_si128(p, _mm_add_epi32(_mm_loadu_si128(p), base));
    }
#else
    for (uint32_t i = 0; i < n4; ++i) out[i] += info.start;
#endif
  }
};

}  // namespace

const Codec& for_codec() {
  static const ForCodec instance;
  return instance;
}

const Codec& simd_for_codec() {
  static const SimdForCodec instance;
  return instance;
}

}  // namespace packdb::detail
