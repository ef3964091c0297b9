#include "codec_impl.h"

namespace packdb::detail {

namespace {

// Plain little-endian key array. `start` tracks keys[0].
class UncompressedCodec final : public RecompressingCodec {
 public:
  CodecId id() const override { return CodecId::kUncompressed; }

  uint32_t payload_bytes(const BlockInfo& info) const override {
    return 4 * info.n;
  }
  uint32_t max_payload_bytes(uint32_t n) const override { return 4 * n; }

  uint32_t encoded_size(std::span<const Key> keys, Key) const override {
    return static_cast<uint32_t>(4 * keys.size());
  }

  BlockInfo compress(std::span<const Key> keys, Key,
                     std::span<uint8_t> out) const override {
    check_capacity(out, encoded_size(keys, 0));
    for (size_t i = 0; i < keys.size(); ++i) store_le32(&out[4 * i], keys[i]);
    const auto n = static_cast<uint32_t>(keys.size());
    return {n, 4 * n, keys.front(), keys.back()};
  }

  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override {
    if (payload.size() < 4 * info.n) {
      throw CorruptionError("uncompressed: short payload");
    }
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), payload.data(), 4 * info.n);
    } else {
      for (uint32_t i = 0; i < info.n; ++i) out[i] = load_le32(&payload[4 * i]);
    }
  }

  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override {
    if (i >= info.n) contract_violation("select: index out of range");
    return load_le32(&payload[4 * i]);
  }

  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override {
    if (info.n == 0 || target > info.last) return std::nullopt;
    uint32_t lo = 0, hi = info.n;
    while (lo < hi) {
      const uint32_t mid = (lo + hi) / 2;
      if (load_le32(&payload[4 * mid]) < target) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return Hit{lo, load_le32(&payload[4 * lo])};
  }

  InsertOutcome insert(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const override {
    if (info.n == 0) return insert_into_empty(info, buf, key);
    if (info.n >= kMaxBlockKeys) contract_violation("insert: block is full");
    if (key > info.last) {
      append(info, buf, key);
      return {true, info.n - 1, InsertPath::kAppend};
    }
    const auto hit = lower_bound(info, buf, key);
    if (hit->key == key) return {false, hit->index, InsertPath::kInPlace};
    uint8_t bytes[4];
    store_le32(bytes, key);
    info.meta = splice(buf, info.meta, 4 * hit->index, 0, bytes);
    ++info.n;
    info.start = std::min(info.start, key);
    return {true, hit->index, InsertPath::kInPlace};
  }

  void append(BlockInfo& info, std::span<uint8_t> buf,
              Key key) const override {
    check_append(info, key);
    if (info.n == 0) {
      insert_into_empty(info, buf, key);
      return;
    }
    check_capacity(buf, info.meta + 4);
    store_le32(&buf[info.meta], key);
    info.meta += 4;
    ++info.n;
    info.last = key;
  }

  DeleteOutcome del(BlockInfo& info, std::span<uint8_t> buf,
                    uint32_t slot) const override {
    if (slot >= info.n) contract_violation("del: slot out of range");
    info.meta = splice(buf, info.meta, 4 * slot, 4, {});
    --info.n;
    if (info.n == 0) {
      info.last = info.start;
    } else if (slot == info.n) {
      info.last = load_le32(&buf[4 * (info.n - 1)]);
    }
    DeleteOutcome out;
    out.growth_bytes = -4;
    return out;
  }

  uint32_t estimate_growth(const BlockInfo&, std::span<const uint8_t>,
                           Key) const override {
    return 4;
  }
};

}  // namespace

const Codec& uncompressed_codec() {
  static const UncompressedCodec instance;
  return instance;
}

}  // namespace packdb::detail
