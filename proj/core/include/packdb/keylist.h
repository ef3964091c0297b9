#pragma once

// KeyList: the compressed key area of a leaf node.
//
// Region layout (all integers little endian):
//   [0, 8)    header: u16 block_count, u16 reserved, u32 capacity
//   [8, ...)  block directory, 16 bytes per block:
//               u16 offset   payload offset, relative to the payload area
//               u16 n        key count (0 marks a gap)
//               u16 size     payload bytes, or bit width for bit-packed codecs
//               u32 start    decode base, <= first key
//               u32 last     last key in the block
//               u16 reserved
//   payload area, starting right after the directory
//
// Payloads appear in directory order. A block may use the bytes up to the
// next block's offset; the last block may grow into the free tail.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "packdb/codec.h"

namespace packdb {

struct BlockDescriptor {
  uint16_t offset = 0;
  uint16_t n = 0;
  uint16_t size = 0;
  Key start = 0;
  Key last = 0;

  friend bool operator==(const BlockDescriptor&,
                         const BlockDescriptor&) = default;
};

enum class KlStatus : uint8_t { kOk, kAlreadyExists, kNotFound, kNeedsSpace };

struct KlResult {
  KlStatus status = KlStatus::kOk;
  uint32_t slot = 0;  // rank of the key within the KeyList
};

struct KlHit {
  uint32_t slot = 0;
  Key key = 0;
  friend bool operator==(const KlHit&, const KlHit&) = default;
};

class KeyList {
 public:
  static constexpr uint32_t kHeaderBytes = 8;
  static constexpr uint32_t kDescriptorBytes = 16;

  // `region` may be larger than the KeyList's capacity; the capacity is
  // read from the header.
  KeyList(std::span<uint8_t> region, CodecId codec, uint32_t max_keys);

  // Writes an empty KeyList header of the given capacity.
  static void init(std::span<uint8_t> region, uint32_t capacity);
  // Bytes a KeyList holding exactly these blocks occupies.
  static uint32_t bytes_needed(CodecId codec,
                               std::span<const CompressedBlock> blocks);

  CodecId codec_id() const { return codec_->id(); }
  uint32_t max_keys() const { return max_keys_; }
  uint32_t capacity() const;
  uint32_t block_count() const;
  BlockDescriptor descriptor(uint32_t i) const;
  BlockInfo info(uint32_t i) const;
  std::span<const uint8_t> payload(uint32_t i) const;

  uint32_t key_count() const;
  uint32_t gap_count() const;
  // Header + directory + payload up to the end of the last block.
  uint32_t used_bytes() const;
  uint32_t free_bytes() const { return capacity() - used_bytes(); }

  // Changes the capacity; must stay >= used_bytes() and within the region.
  void set_capacity(uint32_t capacity);

  // Last non-empty block whose start <= key, or the first non-empty block.
  // Returns block_count() when every block is empty.
  uint32_t locate_block(Key key) const;

  std::optional<KlHit> find(Key key) const;
  std::optional<KlHit> lower_bound(Key key) const;
  Key select(uint32_t slot) const;
  std::optional<Key> first_key() const;
  std::optional<Key> last_key() const;

  // Runs vacuumize once before giving up with kNeedsSpace.
  KlResult insert(Key key);
  KlResult erase(Key key);

  // Closes gaps; bit-packed codecs additionally re-pack every key into
  // full blocks. Returns the bytes reclaimed. Idempotent.
  uint32_t vacuumize();

  // Non-empty blocks in order, each with its own payload copy.
  std::vector<CompressedBlock> extract() const;
  // Replaces the contents. Returns false (and changes nothing) if the
  // blocks do not fit the capacity.
  bool build(std::span<const CompressedBlock> blocks);

  std::vector<Key> decode_all() const;
  // Calls fn(info, decoded keys) for every non-empty block in order.
  void for_each_block(
      const std::function<void(const BlockInfo&, std::span<const Key>)>& fn)
      const;

  // Throws CorruptionError when the layout violates its invariants.
  void check() const;

 private:
  uint8_t* dir(uint32_t i) const;
  uint8_t* payload_base() const;
  uint32_t payload_capacity() const;
  uint32_t payload_end() const;
  uint32_t slot_capacity(uint32_t i) const;
  std::span<uint8_t> slot(uint32_t i) const;
  void write_descriptor(uint32_t i, const BlockDescriptor& d);
  void write_info(uint32_t i, const BlockInfo& info);
  uint32_t keys_before(uint32_t i) const;
  bool ensure_slot(uint32_t i, uint32_t bytes);
  KlResult insert_once(Key key);
  KlResult insert_structural(Key key);
  KlResult erase_once(Key key);

  std::span<uint8_t> region_;
  const Codec* codec_;
  uint32_t max_keys_;
};

// Splits a KeyList holding at least two keys. `left` is rebuilt in place,
// `right` must be an initialised, empty KeyList. Blocks are partitioned near
// the byte midpoint; a lone block is halved first. Returns the pivot, the
// first key of the right side.
Key kl_split(KeyList& left, KeyList& right);

}  // namespace packdb
