#pragma once

// Block codecs for sorted 32-bit keys. Every codec works directly on its
// compressed payload: select, lower-bound search, insert, append and delete
// do not require a separate decompression step unless noted.
//
// A block is described by BlockInfo (the fields kept in a node's block
// directory) plus a payload byte range. `start` is the decode base: for the
// differential codecs the first key is stored as keys[0] - start, for the
// frame-of-reference codecs start is the frame base and equals keys[0].
// keys[0] >= start always holds.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "packdb/kernels.h"

namespace packdb {

enum class CodecId : uint8_t {
  kUncompressed = 0,
  kVByte = 1,
  kVarIntGB = 2,
  kMaskedVByte = 3,
  kBP128 = 4,
  kFor = 5,
  kSimdFor = 6,
};

inline constexpr std::array<CodecId, 7> kAllCodecs = {
    CodecId::kUncompressed, CodecId::kVByte, CodecId::kVarIntGB,
    CodecId::kMaskedVByte,  CodecId::kBP128, CodecId::kFor,
    CodecId::kSimdFor};

std::string_view codec_name(CodecId id);
std::optional<CodecId> parse_codec(std::string_view name);

// Upper bound on keys per block for every codec and block-size setting.
inline constexpr uint32_t kMaxBlockKeys = 256;
// Decode buffers must hold this many values (padding for vector stores and
// BP128's zero-filled tail group).
inline constexpr uint32_t kDecodeBufferSize = kMaxBlockKeys + 16;

struct BlockLimits {
  uint32_t max_keys = 0;
  uint32_t max_payload_bytes = 0;
};

// block_size_override = 0 picks the defaults: 128 keys for BP128, 256 for
// every other codec.
BlockLimits block_limits(CodecId id, uint32_t block_size_override = 0);

struct BlockInfo {
  uint32_t n = 0;
  uint32_t meta = 0;  // payload bytes, or bit width for BP128/FOR/SIMDFOR
  Key start = 0;
  Key last = 0;

  friend bool operator==(const BlockInfo&, const BlockInfo&) = default;
};

struct CompressedBlock {
  BlockInfo info;
  std::vector<uint8_t> payload;
};

struct Hit {
  uint32_t index = 0;
  Key key = 0;
  friend bool operator==(const Hit&, const Hit&) = default;
};

enum class InsertPath : uint8_t { kInPlace, kAppend, kRecompress };

struct InsertOutcome {
  bool inserted = false;  // false: key already present
  uint32_t slot = 0;
  InsertPath path = InsertPath::kInPlace;
};

// Result of deleting from a block. When the re-encoded block does not fit
// the buffer (BP128 only) nothing is modified and `needed_bytes` reports
// the payload size the delete requires.
struct DeleteOutcome {
  bool applied = true;
  int32_t growth_bytes = 0;
  int32_t width_change = 0;
  uint32_t needed_bytes = 0;
};

class Codec {
 public:
  virtual ~Codec() = default;

  virtual CodecId id() const = 0;

  // True when meta holds a bit width rather than a byte count.
  virtual bool meta_is_bit_width() const { return false; }
  // True when removing a key can never grow the payload.
  virtual bool delete_stable() const { return true; }
  // True when vacuumize should decode and re-pack blocks instead of moving
  // them.
  virtual bool repack_on_vacuumize() const { return false; }

  virtual uint32_t payload_bytes(const BlockInfo& info) const = 0;
  virtual uint32_t max_payload_bytes(uint32_t n) const = 0;

  // Exact payload size compress() would produce.
  virtual uint32_t encoded_size(std::span<const Key> keys, Key start) const = 0;
  virtual BlockInfo compress(std::span<const Key> keys, Key start,
                             std::span<uint8_t> out) const = 0;
  // out must hold kDecodeBufferSize values; exactly info.n are meaningful.
  virtual void decompress(const BlockInfo& info,
                          std::span<const uint8_t> payload,
                          std::span<Key> out) const = 0;

  virtual Key select(const BlockInfo& info, std::span<const uint8_t> payload,
                     uint32_t i) const = 0;
  virtual std::optional<Hit> lower_bound(const BlockInfo& info,
                                         std::span<const uint8_t> payload,
                                         Key target) const = 0;

  // buf spans the block's whole slot; its size is the capacity available.
  // The caller guarantees buf.size() >= payload_bytes + estimate_growth.
  virtual InsertOutcome insert(BlockInfo& info, std::span<uint8_t> buf,
                               Key key) const = 0;
  virtual void append(BlockInfo& info, std::span<uint8_t> buf,
                      Key key) const = 0;
  virtual DeleteOutcome del(BlockInfo& info, std::span<uint8_t> buf,
                            uint32_t slot) const = 0;

  // Upper bound on payload growth if key were inserted.
  virtual uint32_t estimate_growth(const BlockInfo& info,
                                   std::span<const uint8_t> payload,
                                   Key key) const = 0;
};

const Codec& codec(CodecId id);

// Value-level operations over self-contained blocks.

CompressedBlock compress_block(CodecId id, std::span<const Key> keys,
                               Key start, uint32_t max_keys = 0);
std::vector<Key> decompress_block(CodecId id, const CompressedBlock& block);
Key select(CodecId id, const CompressedBlock& block, uint32_t i);
std::optional<Hit> find_lower_bound(CodecId id, const CompressedBlock& block,
                                    Key target);
InsertOutcome insert(CodecId id, CompressedBlock& block, Key key);
void append(CodecId id, CompressedBlock& block, Key key);
DeleteOutcome del(CodecId id, CompressedBlock& block, uint32_t slot);
uint32_t estimate_growth(CodecId id, const CompressedBlock& block, Key key);

}  // namespace packdb
