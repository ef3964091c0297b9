#pragma once

// B+-tree node views over raw pages.
//
// Every node starts with a 32-byte header (little endian):
//   0  u32 flags      bit 0: leaf; bits 8..15: layout version
//   4  u32 key_count
//   8  u64 left       leaf siblings; 0 when absent
//  16  u64 right
//  24  u64 child      internal nodes: leftmost child
//
// Leaf:     [32, 32+K) KeyList of capacity K, then record_size * key_count
//           bytes of records.
// Internal: separators as u32[max] at 32, child ids as u64[max] after them;
//           child i+1 of the node is stored at index i.

#include <cstdint>
#include <span>
#include <vector>

#include "packdb/keylist.h"
#include "packdb/store.h"

namespace packdb {

inline constexpr uint32_t kNodeHeaderBytes = 32;
inline constexpr uint32_t kLayoutVersion = 1;
inline constexpr uint32_t kLeafFlag = 1;

struct NodeHeader {
  bool leaf = false;
  uint32_t version = kLayoutVersion;
  uint32_t key_count = 0;
  PageId left = 0;
  PageId right = 0;
  PageId child = 0;

  static NodeHeader read(const uint8_t* page);
  void write(uint8_t* page) const;
};

bool is_leaf(const uint8_t* page);
uint32_t node_key_count(const uint8_t* page);

// Separators a single internal node holds for this configuration.
uint32_t max_separators(const StoreConfig& config);

class LeafNode {
 public:
  LeafNode(uint8_t* page, const StoreConfig& config);

  // Formats an empty leaf.
  static void init(uint8_t* page, const StoreConfig& config);

  NodeHeader header() const { return NodeHeader::read(page_); }
  void set_siblings(PageId left, PageId right);
  uint32_t key_count() const { return node_key_count(page_); }

  KeyList keys() const;
  uint64_t record(uint32_t slot) const;
  void set_record(uint32_t slot, uint64_t value);
  std::vector<uint64_t> records() const;

  KlStatus insert(Key key, uint64_t record);
  KlStatus erase(Key key);

  // Replaces the contents; returns false if they do not fit one page.
  bool assign(std::span<const CompressedBlock> blocks,
              std::span<const uint64_t> records);
  static bool fits(const StoreConfig& config,
                   std::span<const CompressedBlock> blocks);

  // Moves the KeyList/RecordList boundary, sharing the free bytes in
  // proportion to what each side uses. Returns true if it moved.
  bool rebalance(uint32_t extra_records);
  // Hands the KeyList every byte the records (plus `extra_records`) do not
  // need. Returns true if the KeyList grew.
  bool grow_keylist(uint32_t extra_records);

  // Bytes between the KeyList's capacity and the RecordList's end.
  uint32_t record_capacity() const;

 private:
  uint8_t* records_base() const;

  uint8_t* page_;
  const StoreConfig& config_;
  uint32_t max_keys_;
};

class InternalNode {
 public:
  InternalNode(uint8_t* page, const StoreConfig& config);

  static void init(uint8_t* page, PageId leftmost);

  uint32_t count() const { return node_key_count(page_); }
  uint32_t capacity() const { return max_; }
  bool full() const { return count() >= max_; }

  Key key(uint32_t i) const;
  PageId child(uint32_t i) const;  // i in [0, count]
  // Index of the child whose range holds `key`.
  uint32_t child_index(Key key) const;

  // Adds separator `key` at index i with `right` as child i+1.
  void insert(uint32_t i, Key key, PageId right);
  // Removes separator i and child i+1.
  void remove(uint32_t i);

  std::vector<Key> keys() const;
  std::vector<PageId> children() const;
  void assign(std::span<const Key> keys, std::span<const PageId> children);

 private:
  uint8_t* key_ptr(uint32_t i) const;
  uint8_t* child_ptr(uint32_t i) const;

  uint8_t* page_;
  uint32_t max_;
};

}  // namespace packdb
