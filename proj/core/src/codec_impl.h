#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "packdb/codec.h"
#include "packdb/error.h"

namespace packdb::detail {

using DecodeBuffer = std::array<Key, kDecodeBufferSize>;

inline uint32_t vbyte_len(uint32_t v) {
  if (v < (1u << 7)) return 1;
  if (v < (1u << 14)) return 2;
  if (v < (1u << 21)) return 3;
  if (v < (1u << 28)) return 4;
  return 5;
}

inline uint8_t* vbyte_put(uint8_t* p, uint32_t v) {
  while (v >= 0x80) {
    *p++ = static_cast<uint8_t>(v | 0x80);
    v >>= 7;
  }
  *p++ = static_cast<uint8_t>(v);
  return p;
}

inline const uint8_t* vbyte_get(const uint8_t* p, const uint8_t* end,
                                uint32_t& v) {
  uint32_t shift = 0;
  v = 0;
  for (int i = 0; i < 5; ++i) {
    if (p == end) throw CorruptionError("vbyte: truncated value");
    const uint8_t c = *p++;
    v |= uint32_t{c & 0x7Fu} << shift;
    if ((c & 0x80) == 0) return p;
    shift += 7;
  }
  throw CorruptionError("vbyte: value longer than 5 bytes");
}

// Replaces buf[pos, pos+old_len) with `repl`, moving the tail [pos+old_len,
// used) accordingly. Returns the new used size.
inline uint32_t splice(std::span<uint8_t> buf, uint32_t used, uint32_t pos,
                       uint32_t old_len, std::span<const uint8_t> repl) {
  const uint32_t new_used =
      used - old_len + static_cast<uint32_t>(repl.size());
  if (new_used > buf.size()) {
    contract_violation("block buffer too small: need " +
                       std::to_string(new_used) + " bytes, have " +
                       std::to_string(buf.size()));
  }
  uint8_t* base = buf.data();
  std::memmove(base + pos + repl.size(), base + pos + old_len,
               used - pos - old_len);
  if (!repl.empty()) std::memcpy(base + pos, repl.data(), repl.size());
  return new_used;
}

inline void check_capacity(std::span<const uint8_t> buf, uint32_t need) {
  if (need > buf.size()) {
    contract_violation("block buffer too small: need " + std::to_string(need) +
                       " bytes, have " + std::to_string(buf.size()));
  }
}

// Default implementations of the update operations by decoding the block,
// editing the keys and re-encoding. Codecs override the paths they can do
// on compressed data.
class RecompressingCodec : public Codec {
 public:
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

 protected:
  InsertOutcome recompress_insert(BlockInfo& info, std::span<uint8_t> buf,
                                  Key key) const;
  InsertOutcome insert_into_empty(BlockInfo& info, std::span<uint8_t> buf,
                                  Key key) const;
  void check_append(const BlockInfo& info, Key key) const;
};

}  // namespace packdb::detail
