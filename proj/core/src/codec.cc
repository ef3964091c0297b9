#include <string>

#include "codec_impl.h"

namespace packdb {

namespace detail {
const Codec& uncompressed_codec();
const Codec& vbyte_codec();
const Codec& masked_vbyte_codec();
const Codec& varintgb_codec();
const Codec& bp128_codec();
const Codec& for_codec();
const Codec& simd_for_codec();
}  // namespace detail

std::string_view codec_name(CodecId id) {
  switch (id) {
    case CodecId::kUncompressed: return "uncompressed";
    case CodecId::kVByte: return "vbyte";
    case CodecId::kVarIntGB: return "varintgb";
    case CodecId::kMaskedVByte: return "maskedvbyte";
    case CodecId::kBP128: return "bp128";
    case CodecId::kFor: return "for";
    case CodecId::kSimdFor: return "simdfor";
  }
  return "unknown";
}

std::optional<CodecId> parse_codec(std::string_view name) {
  for (CodecId id : kAllCodecs) {
    if (codec_name(id) == name) return id;
  }
  return std::nullopt;
}

const Codec& codec(CodecId id) {
  switch (id) {
    case CodecId::kUncompressed: return detail::uncompressed_codec();
    case CodecId::kVByte: return detail::vbyte_codec();
    case CodecId::kVarIntGB: return detail::varintgb_codec();
    case CodecId::kMaskedVByte: return detail::masked_vbyte_codec();
    case CodecId::kBP128: return detail::bp128_codec();
    case CodecId::kFor: return detail::for_codec();
    case CodecId::kSimdFor: return detail::simd_for_codec();
  }
  contract_violation("unknown codec id " +
                     std::to_string(static_cast<int>(id)));
}

BlockLimits block_limits(CodecId id, uint32_t block_size_override) {
  if (block_size_override != 0 && block_size_override != 128 &&
      block_size_override != 256) {
    contract_violation("block size must be 128 or 256");
  }
  BlockLimits limits;
  limits.max_keys = block_size_override != 0
                        ? block_size_override
                        : (id == CodecId::kBP128 ? 128u : 256u);
  limits.max_payload_bytes = codec(id).max_payload_bytes(limits.max_keys);
  return limits;
}

namespace detail {

Key RecompressingCodec::select(const BlockInfo& info,
                               std::span<const uint8_t> payload,
                               uint32_t i) const {
  if (i >= info.n) contract_violation("select: index out of range");
  DecodeBuffer tmp;
  decompress(info, payload, tmp);
  return tmp[i];
}

std::optional<Hit> RecompressingCodec::lower_bound(
    const BlockInfo& info, std::span<const uint8_t> payload,
    Key target) const {
  if (info.n == 0 || target > info.last) return std::nullopt;
  DecodeBuffer tmp;
  decompress(info, payload, tmp);
  const Key* it = std::lower_bound(tmp.data(), tmp.data() + info.n, target);
  return Hit{static_cast<uint32_t>(it - tmp.data()), *it};
}

InsertOutcome RecompressingCodec::insert_into_empty(BlockInfo& info,
                                                    std::span<uint8_t> buf,
                                                    Key key) const {
  const Key k[1] = {key};
  check_capacity(buf, encoded_size(k, key));
  info = compress(k, key, buf);
  return {true, 0, InsertPath::kRecompress};
}

InsertOutcome RecompressingCodec::recompress_insert(BlockInfo& info,
                                                    std::span<uint8_t> buf,
                                                    Key key) const {
  if (info.n == 0) return insert_into_empty(info, buf, key);
  if (info.n >= kMaxBlockKeys) contract_violation("insert: block is full");
  DecodeBuffer tmp;
  decompress(info, buf.first(payload_bytes(info)), tmp);
  Key* end = tmp.data() + info.n;
  Key* it = std::lower_bound(tmp.data(), end, key);
  const auto slot = static_cast<uint32_t>(it - tmp.data());
  if (it != end && *it == key) return {false, slot, InsertPath::kRecompress};
  std::copy_backward(it, end, end + 1);
  *it = key;
  const std::span<const Key> keys(tmp.data(), info.n + 1);
  const Key start = std::min(info.start, key);
  check_capacity(buf, encoded_size(keys, start));
  info = compress(keys, start, buf);
  return {true, slot, InsertPath::kRecompress};
}

InsertOutcome RecompressingCodec::insert(BlockInfo& info,
                                         std::span<uint8_t> buf,
                                         Key key) const {
  return recompress_insert(info, buf, key);
}

void RecompressingCodec::check_append(const BlockInfo& info, Key key) const {
  if (info.n > 0 && key <= info.last) {
    contract_violation("append: key " + std::to_string(key) +
                       " is not above the block's last key " +
                       std::to_string(info.last));
  }
  if (info.n >= kMaxBlockKeys) contract_violation("append: block is full");
}

void RecompressingCodec::append(BlockInfo& info, std::span<uint8_t> buf,
                                Key key) const {
  check_append(info, key);
  recompress_insert(info, buf, key);
}

DeleteOutcome RecompressingCodec::del(BlockInfo& info, std::span<uint8_t> buf,
                                      uint32_t slot) const {
  if (slot >= info.n) contract_violation("del: slot out of range");
  const uint32_t old_bytes = payload_bytes(info);
  const uint32_t old_meta = info.meta;
  if (info.n == 1) {
    info.n = 0;
    info.meta = 0;
    info.last = info.start;
    DeleteOutcome out;
    out.growth_bytes = -static_cast<int32_t>(old_bytes);
    if (meta_is_bit_width()) out.width_change = -static_cast<int32_t>(old_meta);
    return out;
  }
  DecodeBuffer tmp;
  decompress(info, buf.first(old_bytes), tmp);
  std::copy(tmp.begin() + slot + 1, tmp.begin() + info.n,
            tmp.begin() + slot);
  const std::span<const Key> keys(tmp.data(), info.n - 1);
  const uint32_t need = encoded_size(keys, info.start);
  DeleteOutcome out;
  if (need > buf.size()) {
    out.applied = false;
    out.needed_bytes = need;
    out.growth_bytes = static_cast<int32_t>(need) -
                       static_cast<int32_t>(old_bytes);
    return out;
  }
  info = compress(keys, info.start, buf);
  out.growth_bytes = static_cast<int32_t>(payload_bytes(info)) -
                     static_cast<int32_t>(old_bytes);
  if (meta_is_bit_width()) {
    out.width_change = static_cast<int32_t>(info.meta) -
                       static_cast<int32_t>(old_meta);
  }
  return out;
}

}  // namespace detail

// Value-level wrappers.

namespace {

void validate_keys(std::span<const Key> keys, Key start) {
  if (keys.empty()) contract_violation("compress_block: empty block");
  if (keys[0] < start) contract_violation("compress_block: key below start");
  for (size_t i = 1; i < keys.size(); ++i) {
    if (keys[i] < keys[i - 1]) {
      contract_violation("compress_block: keys are not sorted");
    }
  }
}

std::span<const uint8_t> used(const Codec& c, const CompressedBlock& b) {
  const uint32_t bytes = c.payload_bytes(b.info);
  if (bytes > b.payload.size()) {
    throw CorruptionError("payload shorter than its metadata claims");
  }
  return std::span<const uint8_t>(b.payload).first(bytes);
}

}  // namespace

CompressedBlock compress_block(CodecId id, std::span<const Key> keys,
                               Key start, uint32_t max_keys) {
  const Codec& c = codec(id);
  const uint32_t limit = max_keys != 0 ? max_keys : block_limits(id).max_keys;
  if (keys.size() > limit || keys.size() > kMaxBlockKeys) {
    contract_violation("compress_block: " + std::to_string(keys.size()) +
                       " keys exceed the block limit of " +
                       std::to_string(limit));
  }
  validate_keys(keys, start);
  CompressedBlock block;
  block.payload.resize(c.encoded_size(keys, start));
  block.info = c.compress(keys, start, block.payload);
  return block;
}

std::vector<Key> decompress_block(CodecId id, const CompressedBlock& block) {
  const Codec& c = codec(id);
  std::vector<Key> out(kDecodeBufferSize);
  c.decompress(block.info, used(c, block), out);
  out.resize(block.info.n);
  return out;
}

Key select(CodecId id, const CompressedBlock& block, uint32_t i) {
  const Codec& c = codec(id);
  if (i >= block.info.n) contract_violation("select: index out of range");
  return c.select(block.info, used(c, block), i);
}

std::optional<Hit> find_lower_bound(CodecId id, const CompressedBlock& block,
                                    Key target) {
  const Codec& c = codec(id);
  return c.lower_bound(block.info, used(c, block), target);
}

InsertOutcome insert(CodecId id, CompressedBlock& block, Key key) {
  const Codec& c = codec(id);
  const uint32_t bytes = c.payload_bytes(block.info);
  const uint32_t growth = c.estimate_growth(block.info, used(c, block), key);
  block.payload.resize(bytes + growth);
  InsertOutcome out = c.insert(block.info, block.payload, key);
  block.payload.resize(c.payload_bytes(block.info));
  return out;
}

void append(CodecId id, CompressedBlock& block, Key key) {
  const Codec& c = codec(id);
  const uint32_t bytes = c.payload_bytes(block.info);
  const uint32_t growth = c.estimate_growth(block.info, used(c, block), key);
  block.payload.resize(bytes + growth);
  c.append(block.info, block.payload, key);
  block.payload.resize(c.payload_bytes(block.info));
}

DeleteOutcome del(CodecId id, CompressedBlock& block, uint32_t slot) {
  const Codec& c = codec(id);
  if (slot >= block.info.n) contract_violation("del: slot out of range");
  DeleteOutcome out = c.del(block.info, block.payload, slot);
  if (!out.applied) {
    // Grow the buffer as the signal requests and retry.
    block.payload.resize(out.needed_bytes);
    out = c.del(block.info, block.payload, slot);
  }
  block.payload.resize(c.payload_bytes(block.info));
  return out;
}

uint32_t estimate_growth(CodecId id, const CompressedBlock& block, Key key) {
  const Codec& c = codec(id);
  return c.estimate_growth(block.info, used(c, block), key);
}

}  // namespace packdb
