#include "codec_impl.h"

#if defined(__SSSE3__)
#include <tmmintrin.h>
#endif

namespace packdb::detail {

namespace {

// Group varint: per group of four deltas one control byte holding four
// 2-bit (length - 1) descriptors, the first value in the two most
// significant bits, followed by each value's little-endian bytes. A
// trailing partial group leaves its unused descriptors at 00 and emits no
// bytes for them.

inline uint32_t gb_len(uint32_t v) {
  if (v < (1u << 8)) return 1;
  if (v < (1u << 16)) return 2;
  if (v < (1u << 24)) return 3;
  return 4;
}

inline uint32_t lane_len(uint8_t ctrl, uint32_t lane) {
  return ((ctrl >> (6 - 2 * lane)) & 3u) + 1;
}

inline uint32_t read_le(const uint8_t* p, uint32_t len) {
  uint32_t v = 0;
  for (uint32_t b = 0; b < len; ++b) v |= uint32_t{p[b]} << (8 * b);
  return v;
}

inline uint8_t* write_le(uint8_t* p, uint32_t v, uint32_t len) {
  for (uint32_t b = 0; b < len; ++b) *p++ = static_cast<uint8_t>(v >> (8 * b));
  return p;
}

struct GroupShuffle {
  std::array<uint8_t, 16> shuffle{};
  uint8_t bytes = 0;  // data bytes following the control byte
};

constexpr std::array<GroupShuffle, 256> make_group_table() {
  std::array<GroupShuffle, 256> t{};
  for (uint32_t c = 0; c < 256; ++c) {
    uint32_t off = 0;
    for (auto& s : t[c].shuffle) s = 0x80;
    for (uint32_t lane = 0; lane < 4; ++lane) {
      const uint32_t len = ((c >> (6 - 2 * lane)) & 3u) + 1;
      for (uint32_t b = 0; b < len; ++b) {
        t[c].shuffle[4 * lane + b] = static_cast<uint8_t>(off + b);
      }
      off += len;
    }
    t[c].bytes = static_cast<uint8_t>(off);
  }
  return t;
}

constexpr auto kGroupTable = make_group_table();
static_assert(kGroupTable[0b01000001].bytes == 6);

uint32_t encoded_deltas_size(std::span<const uint32_t> deltas) {
  uint32_t bytes = static_cast<uint32_t>((deltas.size() + 3) / 4);
  for (uint32_t d : deltas) bytes += gb_len(d);
  return bytes;
}

uint8_t* encode_deltas(std::span<const uint32_t> deltas, uint8_t* p) {
  for (size_t g = 0; g < deltas.size(); g += 4) {
    uint8_t* ctrl = p++;
    *ctrl = 0;
    for (uint32_t lane = 0; lane < 4 && g + lane < deltas.size(); ++lane) {
      const uint32_t len = gb_len(deltas[g + lane]);
      *ctrl |= static_cast<uint8_t>((len - 1) << (6 - 2 * lane));
      p = write_le(p, deltas[g + lane], len);
    }
  }
  return p;
}

// Decodes `count` raw deltas starting at a group boundary.
const uint8_t* decode_deltas(const uint8_t* p, const uint8_t* end,
                             uint32_t count, uint32_t* out) {
  uint32_t i = 0;
  while (i < count) {
    if (p >= end) throw CorruptionError("varintgb: truncated control byte");
    const uint8_t ctrl = *p++;
    const uint32_t lanes = std::min<uint32_t>(4, count - i);
    for (uint32_t lane = 0; lane < lanes; ++lane) {
      const uint32_t len = lane_len(ctrl, lane);
      if (end - p < static_cast<ptrdiff_t>(len)) {
        throw CorruptionError("varintgb: truncated value");
      }
      out[i++] = read_le(p, len);
      p += len;
    }
  }
  return p;
}

// Byte size of a group holding `lanes` values.
inline uint32_t group_bytes(uint8_t ctrl, uint32_t lanes) {
  uint32_t bytes = 1;
  for (uint32_t lane = 0; lane < lanes; ++lane) bytes += lane_len(ctrl, lane);
  return bytes;
}

class VarIntGBCodec final : public RecompressingCodec {
 public:
  CodecId id() const override { return CodecId::kVarIntGB; }

  uint32_t payload_bytes(const BlockInfo& info) const override {
    return info.meta;
  }
  uint32_t max_payload_bytes(uint32_t n) const override {
    return (n + 3) / 4 + 4 * n;
  }

  uint32_t encoded_size(std::span<const Key> keys, Key start) const override {
    uint32_t bytes = static_cast<uint32_t>((keys.size() + 3) / 4);
    Key prev = start;
    for (Key k : keys) {
      bytes += gb_len(k - prev);
      prev = k;
    }
    return bytes;
  }

  BlockInfo compress(std::span<const Key> keys, Key start,
                     std::span<uint8_t> out) const override {
    check_capacity(out, encoded_size(keys, start));
    uint32_t deltas[kMaxBlockKeys];
    compute_deltas(keys, start, std::span<uint32_t>(deltas, keys.size()));
    uint8_t* end = encode_deltas(std::span<const uint32_t>(deltas, keys.size()),
                                 out.data());
    return {static_cast<uint32_t>(keys.size()),
            static_cast<uint32_t>(end - out.data()), start, keys.back()};
  }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    const uint8_t* p = payload.data();
    const uint8_t* end = p + payload.size();
    uint32_t i = 0;
#if defined(__SSSE3__)
    __m128i carry = _mm_set1_epi32(static_cast<int>(info.start));
    while (info.n - i >= 4 && end - p >= 17) {
      const uint8_t ctrl = *p;
      const GroupShuffle& g = kGroupTable[ctrl];
      __m128i v = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 1));
      v = _mm_shuffle_epi8(
          v, _mm_loadu_si128(reinterpret_cast<const __m128i*>(g.shuffle.data())));
      v = _mm_add_epi32(v, _mm_slli_si128(v, 8));
      v = _mm_add_epi32(v, _mm_slli_si128(v, 4));
      v = _mm_add_epi32(v, carry);
      _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data() + i), v);
      carry = _mm_shuffle_epi32(v, 0xFF);
      p += 1 + g.bytes;
      i += 4;
    }
    Key acc = static_cast<Key>(_mm_cvtsi128_si32(carry));
#else
    Key acc = info.start;
#endif
    while (i < info.n) {
      if (p >= end) throw CorruptionError("varintgb: truncated control byte");
      const uint8_t ctrl = *p++;
      const uint32_t lanes = std::min<uint32_t>(4, info.n - i);
      for (uint32_t lane = 0; lane < lanes; ++lane) {
        const uint32_t len = lane_len(ctrl, lane);
        if (end - p < static_cast<ptrdiff_t>(len)) {
          throw CorruptionError("varintgb: truncated value");
        }
        acc += read_le(p, len);
        p += len;
        out[i++] = acc;
      }
    }
  }

  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override {
    if (i >= info.n) contract_violation("select: index out of range");
    const uint8_t* p = payload.data();
    const uint8_t* end = p + payload.size();
    Key acc = info.start;
    uint32_t j = 0;
    while (true) {
      if (p >= end) throw CorruptionError("varintgb: truncated control byte");
      const uint8_t ctrl = *p++;
      const uint32_t lanes = std::min<uint32_t>(4, info.n - j);
      for (uint32_t lane = 0; lane < lanes; ++lane, ++j) {
        const uint32_t len = lane_len(ctrl, lane);
        acc += read_le(p, len);
        p += len;
        if (j == i) return acc;
      }
    }
  }

  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override {
    if (info.n == 0 || target > info.last) return std::nullopt;
    const uint8_t* p = payload.data();
    const uint8_t* end = p + payload.size();
    Key acc = info.start;
    uint32_t j = 0;
    while (j < info.n) {
      if (p >= end) throw CorruptionError("varintgb: truncated control byte");
      const uint8_t ctrl = *p++;
      const uint32_t lanes = std::min<uint32_t>(4, info.n - j);
      for (uint32_t lane = 0; lane < lanes; ++lane, ++j) {
        const uint32_t len = lane_len(ctrl, lane);
        acc += read_le(p, len);
        p += len;
        if (acc >= target) return Hit{j, acc};
      }
    }
    throw CorruptionError("varintgb: cached last key not found in block");
  }

  InsertOutcome insert(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const override {
    if (info.n == 0) return insert_into_empty(info, buf, key);
    if (info.n >= kMaxBlockKeys) contract_violation("insert: block is full");
    if (key > info.last) {
      append(info, buf, key);
      return {true, info.n - 1, InsertPath::kAppend};
    }
    // Find the insertion index, remembering where its group begins.
    const uint8_t* base = buf.data();
    const uint8_t* end = base + info.meta;
    const uint8_t* p = base;
    Key acc = info.start;
    uint32_t j = 0;
    uint32_t slot = info.n;
    const uint8_t* group_pos = base;
    Key group_base = info.start;
    if (key < info.start) {
      slot = 0;
    } else {
      while (j < info.n && slot == info.n) {
        group_pos = p;
        group_base = acc;
        const uint8_t ctrl = *p++;
        const uint32_t lanes = std::min<uint32_t>(4, info.n - j);
        for (uint32_t lane = 0; lane < lanes; ++lane, ++j) {
          const uint32_t len = lane_len(ctrl, lane);
          acc += read_le(p, len);
          p += len;
          if (acc >= key) {
            if (acc == key) return {false, j, InsertPath::kInPlace};
            slot = j;
            break;
          }
        }
      }
    }
    // Groups before the insertion group stay as they are; the rest is
    // re-encoded with the new delta pair.
    const uint32_t first = (slot / 4) * 4;
    const uint32_t tail_n = info.n - first;
    uint32_t deltas[kMaxBlockKeys + 1];
    decode_deltas(group_pos, end, tail_n, deltas);
    const uint32_t local = slot - first;
    std::copy_backward(deltas + local, deltas + tail_n, deltas + tail_n + 1);
    if (key < info.start) {
      deltas[0] = 0;
      deltas[1] = deltas[1] + (info.start - key);
      info.start = key;
    } else {
      Key prev = group_base;
      for (uint32_t t = 0; t < local; ++t) prev += deltas[t];
      const uint32_t whole = deltas[local + 1];
      deltas[local] = key - prev;
      deltas[local + 1] = whole - deltas[local];
    }
    const std::span<const uint32_t> tail(deltas, tail_n + 1);
    const auto pos = static_cast<uint32_t>(group_pos - base);
    check_capacity(buf, pos + encoded_deltas_size(tail));
    uint8_t* out_end = encode_deltas(tail, buf.data() + pos);
    info.meta = static_cast<uint32_t>(out_end - buf.data());
    ++info.n;
    return {true, slot, InsertPath::kInPlace};
  }

  void append(BlockInfo& info, std::span<uint8_t> buf,
              Key key) const override {
    check_append(info, key);
    if (info.n == 0) {
      insert_into_empty(info, buf, key);
      return;
    }
    const uint32_t d = key - info.last;
    const uint32_t len = gb_len(d);
    const uint32_t lane = info.n % 4;
    if (lane == 0) {
      check_capacity(buf, info.meta + 1 + len);
      uint8_t* p = buf.data() + info.meta;
      *p++ = static_cast<uint8_t>((len - 1) << 6);
      write_le(p, d, len);
      info.meta += 1 + len;
    } else {
      // Skip to the trailing partial group and fill its next lane.
      check_capacity(buf, info.meta + len);
      uint8_t* p = buf.data();
      for (uint32_t g = 0; g < info.n / 4; ++g) p += group_bytes(*p, 4);
      *p |= static_cast<uint8_t>((len - 1) << (6 - 2 * lane));
      write_le(buf.data() + info.meta, d, len);
      info.meta += len;
    }
    ++info.n;
    info.last = key;
  }

  DeleteOutcome del(BlockInfo& info, std::span<uint8_t> buf,
                    uint32_t slot) const override {
    if (slot >= info.n) contract_violation("del: slot out of range");
    const uint32_t old_bytes = info.meta;
    if (info.n == 1) {
      info = {0, 0, info.start, info.start};
      DeleteOutcome out;
      out.growth_bytes = -static_cast<int32_t>(old_bytes);
      return out;
    }
    const uint8_t* end = buf.data() + info.meta;
    const uint8_t* p = buf.data();
    Key group_base = info.start;
    const uint32_t first = (slot / 4) * 4;
    for (uint32_t g = 0; g < first / 4; ++g) {
      const uint8_t ctrl = *p++;
      for (uint32_t lane = 0; lane < 4; ++lane) {
        const uint32_t len = lane_len(ctrl, lane);
        group_base += read_le(p, len);
        p += len;
      }
    }
    const uint32_t tail_n = info.n - first;
    uint32_t deltas[kMaxBlockKeys];
    decode_deltas(p, end, tail_n, deltas);
    const uint32_t local = slot - first;
    if (slot + 1 == info.n) {
      Key prev = group_base;
      for (uint32_t t = 0; t < local; ++t) prev += deltas[t];
      info.last = slot == 0 ? info.start : prev;
    } else {
      deltas[local + 1] += deltas[local];
    }
    std::copy(deltas + local + 1, deltas + tail_n, deltas + local);
    const auto pos = static_cast<uint32_t>(p - buf.data());
    uint8_t* out_end = encode_deltas(
        std::span<const uint32_t>(deltas, tail_n - 1), buf.data() + pos);
    info.meta = static_cast<uint32_t>(out_end - buf.data());
    --info.n;
    DeleteOutcome out;
    out.growth_bytes = static_cast<int32_t>(info.meta) -
                       static_cast<int32_t>(old_bytes);
    return out;
  }

  uint32_t estimate_growth(const BlockInfo& info, std::span<const uint8_t>,
                           Key key) const override {
    if (info.n == 0) return 2;
    if (key > info.last) {
      return gb_len(key - info.last) + (info.n % 4 == 0 ? 1 : 0);
    }
    // One split delta grows by at most 7 value bytes, plus a control byte.
    return 8;
  }
};

}  // namespace

const Codec& varintgb_codec() {
  static const VarIntGBCodec instance;
  return instance;
}

}  // namespace packdb::detail
