#pragma once

#include "codec_impl.h"

namespace packdb::detail {

// Differentially coded VByte: 7 data bits per byte, least significant group
// first, high bit set on every byte but the last of a value. All updates
// edit the byte stream in place.
class VByteCodec : public RecompressingCodec {
 public:
  CodecId id() const override { return CodecId::kVByte; }

  uint32_t payload_bytes(const BlockInfo& info) const override {
    return info.meta;
  }
  uint32_t max_payload_bytes(uint32_t n) const override { return 5 * n; }

  uint32_t encoded_size(std::span<const Key> keys, Key start) const override;
  BlockInfo compress(std::span<const Key> keys, Key start,
                     std::span<uint8_t> out) const override;
  void decompress(const BlockInfo& info, std::span<const uint8_t> payload,
                  std::span<Key> out) const override;
  Key select(const BlockInfo& info, std::span<const uint8_t> payload,
             uint32_t i) const override;
  std::optional<Hit> lower_bound(const BlockInfo& info,
                                 std::span<const uint8_t> payload,
                                 Key target) const override;
  InsertOutcome insert(BlockInfo& info, std::span<uint8_t> buf,
                       Key key) const override;
  void append(BlockInfo& info, std::span<uint8_t> buf, Key key) const override;
  DeleteOutcome del(BlockInfo& info, std::span<uint8_t> buf,
                    uint32_t slot) const override;
  uint32_t estimate_growth(const BlockInfo& info,
                           std::span<const uint8_t> payload,
                           Key key) const override;
};

}  // namespace packdb::detail
