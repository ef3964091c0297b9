#include "vbyte_codec.h"

namespace packdb::detail {

uint32_t VByteCodec::encoded_size(std::span<const Key> keys, Key start) const {
  uint32_t bytes = 0;
  Key prev = start;
  for (Key k : keys) {
    bytes += vbyte_len(k - prev);
    prev = k;
  }
  return bytes;
}

BlockInfo VByteCodec::compress(std::span<const Key> keys, Key start,
                               std::span<uint8_t> out) const {
  check_capacity(out, encoded_size(keys, start));
  uint8_t* p = out.data();
  Key prev = start;
  for (Key k : keys) {
    p = vbyte_put(p, k - prev);
    prev = k;
  }
  return {static_cast<uint32_t>(keys.size()),
          static_cast<uint32_t>(p - out.data()), start, keys.back()};
}

void VByteCodec::decompress(const BlockInfo& info,
                            std::span<const uint8_t> payload,
                            std::span<Key> out) const {
  const uint8_t* p = payload.data();
  const uint8_t* end = p + payload.size();
  Key acc = info.start;
  for (uint32_t i = 0; i < info.n; ++i) {
    uint32_t d;
    if (p < end && *p < 0x80) {
      d = *p++;
    } else {
      p = vbyte_get(p, end, d);
    }
    acc += d;
    out[i] = acc;
  }
}

Key VByteCodec::select(const BlockInfo& info, std::span<const uint8_t> payload,
                       uint32_t i) const {
  if (i >= info.n) contract_violation("select: index out of range");
  const uint8_t* p = payload.data();
  const uint8_t* end = p + payload.size();
  Key acc = info.start;
  for (uint32_t j = 0; j <= i; ++j) {
    uint32_t d;
    p = vbyte_get(p, end, d);
    acc += d;
  }
  return acc;
}

std::optional<Hit> VByteCodec::lower_bound(const BlockInfo& info,
                                           std::span<const uint8_t> payload,
                                           Key target) const {
  if (info.n == 0 || target > info.last) return std::nullopt;
  const uint8_t* p = payload.data();
  const uint8_t* end = p + payload.size();
  Key acc = info.start;
  for (uint32_t j = 0; j < info.n; ++j) {
    uint32_t d;
    p = vbyte_get(p, end, d);
    acc += d;
    if (acc >= target) return Hit{j, acc};
  }
  throw CorruptionError("vbyte: cached last key not found in block");
}

InsertOutcome VByteCodec::insert(BlockInfo& info, std::span<uint8_t> buf,
                                 Key key) const {
  if (info.n == 0) return insert_into_empty(info, buf, key);
  if (info.n >= kMaxBlockKeys) contract_violation("insert: block is full");
  if (key > info.last) {
    append(info, buf, key);
    return {true, info.n - 1, InsertPath::kAppend};
  }
  const uint8_t* base = buf.data();
  const uint8_t* end = base + info.meta;
  uint8_t repl[10];
  if (key < info.start) {
    // New first key: its delta is 0 against the new start, and the old first
    // delta is re-expressed against the inserted key.
    uint32_t d0;
    const uint8_t* next = vbyte_get(base, end, d0);
    const Key first = info.start + d0;
    uint8_t* r = vbyte_put(repl, 0);
    r = vbyte_put(r, first - key);
    info.meta = splice(buf, info.meta, 0, static_cast<uint32_t>(next - base),
                       std::span<const uint8_t>(repl, r - repl));
    info.start = key;
    ++info.n;
    return {true, 0, InsertPath::kInPlace};
  }
  const uint8_t* p = base;
  Key prev = info.start;
  for (uint32_t i = 0; i < info.n; ++i) {
    uint32_t d;
    const uint8_t* next = vbyte_get(p, end, d);
    const Key x = prev + d;
    if (x >= key) {
      if (x == key) return {false, i, InsertPath::kInPlace};
      // Only the delta that straddles the new key is rewritten.
      uint8_t* r = vbyte_put(repl, key - prev);
      r = vbyte_put(r, x - key);
      info.meta = splice(buf, info.meta, static_cast<uint32_t>(p - base),
                         static_cast<uint32_t>(next - p),
                         std::span<const uint8_t>(repl, r - repl));
      ++info.n;
      return {true, i, InsertPath::kInPlace};
    }
    prev = x;
    p = next;
  }
  throw CorruptionError("vbyte: cached last key not found in block");
}

void VByteCodec::append(BlockInfo& info, std::span<uint8_t> buf,
                        Key key) const {
  check_append(info, key);
  if (info.n == 0) {
    insert_into_empty(info, buf, key);
    return;
  }
  const uint32_t d = key - info.last;
  check_capacity(buf, info.meta + vbyte_len(d));
  uint8_t* p = vbyte_put(buf.data() + info.meta, d);
  info.meta = static_cast<uint32_t>(p - buf.data());
  ++info.n;
  info.last = key;
}

DeleteOutcome VByteCodec::del(BlockInfo& info, std::span<uint8_t> buf,
                              uint32_t slot) const {
  if (slot >= info.n) contract_violation("del: slot out of range");
  const uint32_t old_bytes = info.meta;
  const uint8_t* base = buf.data();
  const uint8_t* end = base + info.meta;
  const uint8_t* p = base;
  Key prev = info.start;
  for (uint32_t i = 0; i < slot; ++i) {
    uint32_t d;
    p = vbyte_get(p, end, d);
    prev += d;
  }
  uint32_t d_slot;
  const uint8_t* after = vbyte_get(p, end, d_slot);
  const auto pos = static_cast<uint32_t>(p - base);
  if (slot + 1 == info.n) {
    info.meta = splice(buf, info.meta, pos, static_cast<uint32_t>(after - p),
                       {});
    info.last = slot == 0 ? info.start : prev;
  } else {
    // Merge the removed key's delta into its successor's.
    uint32_t d_next;
    const uint8_t* after_next = vbyte_get(after, end, d_next);
    uint8_t repl[5];
    uint8_t* r = vbyte_put(repl, d_slot + d_next);
    info.meta = splice(buf, info.meta, pos,
                       static_cast<uint32_t>(after_next - p),
                       std::span<const uint8_t>(repl, r - repl));
  }
  --info.n;
  DeleteOutcome out;
  out.growth_bytes = static_cast<int32_t>(info.meta) -
                     static_cast<int32_t>(old_bytes);
  return out;
}

uint32_t VByteCodec::estimate_growth(const BlockInfo& info,
                                     std::span<const uint8_t>,
                                     Key key) const {
  if (info.n == 0) return 1;
  if (key > info.last) return vbyte_len(key - info.last);
  // Two worst-case deltas replace one.
  return 10;
}

const Codec& vbyte_codec() {
  static const VByteCodec instance;
  return instance;
}

}  // namespace packdb::detail
