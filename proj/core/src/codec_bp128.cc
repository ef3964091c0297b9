#include "codec_impl.h"

namespace packdb::detail {

namespace {

// Binary packing of deltas in groups of 128 at one shared bit width. A
// partial group is padded with zero deltas, so a block of n keys occupies
// 16 * b * ceil(n / 128) bytes. meta holds b.
class BP128Codec final : public RecompressingCodec {
 public:
  CodecId id() const override { return CodecId::kBP128; }
  bool meta_is_bit_width() const override { return true; }
  bool delete_stable() const override { return false; }
  bool repack_on_vacuumize() const override { return true; }

  static uint32_t groups(uint32_t n) { return (n + 127) / 128; }

  uint32_t payload_bytes(const BlockInfo& info) const override {
    return 16 * info.meta * groups(info.n);
  }
  uint32_t max_payload_bytes(uint32_t n) const override {
    return 16 * 32 * groups(n);
  }

  uint32_t encoded_size(std::span<const Key> keys, Key start) const override {
    uint32_t acc = 0;
    Key prev = start;
    for (Key k : keys) {
      acc |= k - prev;
      prev = k;
    }
    return 16 * bits_for(acc) * groups(static_cast<uint32_t>(keys.size()));
  }

  BlockInfo compress(std::span<const Key> keys, Key start,
                     std::span<uint8_t> out) const override {
    const auto n = static_cast<uint32_t>(keys.size());
    uint32_t deltas[kMaxBlockKeys] = {};
    compute_deltas(keys, start, std::span<uint32_t>(deltas, n));
    const uint32_t padded = 128 * groups(n);
    const BitWidth b = max_bits(std::span<const uint32_t>(deltas, n));
    check_capacity(out, 16 * b.bits() * groups(n));
    pack_bits(std::span<const uint32_t>(deltas, padded), b, out);
    return {n, b.bits(), start, keys.back()};
  }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    const uint32_t b = info.meta;
    if (b > 32) throw CorruptionError("bp128: bit width above 32");
    if (payload.size() < payload_bytes(info)) {
      throw CorruptionError("bp128: short payload");
    }
    Key carry = info.start;
    for (uint32_t g = 0; g < groups(info.n); ++g) {
      Key* dst = out.data() + 128 * g;
      unpack128(payload.data() + 16 * b * g, b, dst);
      prefix_sum_vector4_inplace(dst, 128, carry);
      carry = dst[127];
    }
  }

  // Unpacks the groups up to slot i and sums their deltas.
  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override {
    if (i >= info.n) contract_violation("select: index out of range");
    const uint32_t b = info.meta;
    Key acc = info.start;
    uint32_t deltas[128];
    for (uint32_t g = 0; g <= i / 128; ++g) {
      unpack128(payload.data() + 16 * b * g, b, deltas);
      const uint32_t upto = g == i / 128 ? i % 128 + 1 : 128;
      for (uint32_t j = 0; j < upto; ++j) acc += deltas[j];
    }
    return acc;
  }

  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override {
    if (info.n == 0 || target > info.last) return std::nullopt;
    const uint32_t b = info.meta;
    Key group[128];
    Key carry = info.start;
    for (uint32_t g = 0; g < groups(info.n); ++g) {
      unpack128(payload.data() + 16 * b * g, b, group);
      prefix_sum_vector4_inplace(group, 128, carry);
      const uint32_t valid = std::min<uint32_t>(128, info.n - 128 * g);
      for (uint32_t j = 0; j < valid; ++j) {
        if (group[j] >= target) return Hit{128 * g + j, group[j]};
      }
      carry = group[127];
    }
    throw CorruptionError("bp128: cached last key not found in block");
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
    uint32_t b = info.meta;
    if (key > info.last) {
      b = std::max(b, bits_for(key - info.last));
    } else if (key < info.start) {
      b = std::max(b, bits_for(info.last - key));
    }
    return 16 * b * groups(info.n + 1) - payload_bytes(info);
  }

 private:
  // Patches the delta into the packed words when the current width admits
  // it; otherwise decodes and re-encodes. Returns true for the in-place
  // path.
  bool append_in_place(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const {
    const uint32_t d = key - info.last;
    const uint32_t b = info.meta;
    if (!BitWidth(b).admits(d)) {
      recompress_insert(info, buf, key);
      return false;
    }
    const uint32_t old_bytes = payload_bytes(info);
    const uint32_t new_bytes = 16 * b * groups(info.n + 1);
    check_capacity(buf, new_bytes);
    if (new_bytes > old_bytes) {
      std::fill(buf.begin() + old_bytes, buf.begin() + new_bytes, uint8_t{0});
    }
    write_packed(buf.first(new_bytes), info.n, b, d);
    ++info.n;
    info.last = key;
    return true;
  }
};

}  // namespace

const Codec& bp128_codec() {
  static const BP128Codec instance;
  return instance;
}

}  // namespace packdb::detail
