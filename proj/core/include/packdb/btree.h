#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "packdb/node.h"
#include "packdb/store.h"

namespace packdb {

enum class OpStatus : uint8_t { kOk, kAlreadyExists, kNotFound };

// Structural change made during one operation.
struct TraceEvent {
  enum class Kind : uint8_t {
    kSplit,         // node split; sibling is the new right node
    kRootSplit,     // a new root was placed above `node`
    kMerge,         // sibling merged into node and freed
    kRootCollapse,  // root `node` freed, `sibling` became the root
  };
  Kind kind = Kind::kSplit;
  bool leaf = false;
  bool during_erase = false;
  PageId node = 0;
  PageId sibling = 0;
  PageId parent = 0;
  PageId neighbor = 0;  // leaf whose sibling link was rewritten, or 0
  bool parent_had_room = true;
};

struct OpTrace {
  std::vector<PageId> path;  // root to leaf, after structural changes
  std::vector<TraceEvent> events;
  std::set<PageId> dirtied;
};

struct AverageResult {
  uint64_t sum = 0;
  uint64_t count = 0;
  // Empty when no key qualified.
  std::optional<double> mean() const {
    if (count == 0) return std::nullopt;
    return static_cast<double>(sum) / static_cast<double>(count);
  }
};

struct TreeStats {
  uint64_t keys = 0;
  uint64_t leaves = 0;
  uint64_t internal_nodes = 0;
  uint64_t empty_leaves = 0;
  uint64_t blocks = 0;
  uint64_t gaps = 0;
  uint32_t height = 0;
  uint64_t keylist_bytes = 0;  // sum of leaf KeyList used bytes
  uint64_t live_pages = 0;     // tree pages, excluding header and freelist
};

class BTree;

// Forward iterator over the leaf chain. A cursor keeps the current block
// decoded; any tree mutation invalidates it.
class Cursor {
 public:
  bool valid() const { return valid_; }
  Key key() const;
  uint64_t record() const;
  // Advances; returns valid().
  bool next();

 private:
  friend class BTree;
  explicit Cursor(BTree* tree);
  void check() const;
  void load_from(PageId leaf, uint32_t block);
  void seek(PageId leaf, Key key);

  BTree* tree_;
  uint64_t epoch_;
  bool valid_ = false;
  PageId leaf_ = 0;
  uint32_t block_ = 0;
  uint32_t pos_ = 0;
  uint32_t slot_base_ = 0;  // keys in earlier blocks of this leaf
  std::vector<Key> cache_;
  uint32_t cache_n_ = 0;
};

class BTree {
 public:
  // Formats an empty root leaf if the store has no root yet.
  explicit BTree(Pager& pager);

  OpStatus insert(Key key, uint64_t record = 0);
  std::optional<uint64_t> find(Key key);
  bool contains(Key key) { return find(key).has_value(); }
  OpStatus erase(Key key);

  Cursor cursor_first();
  // Positioned at the first key >= key.
  Cursor cursor_lower_bound(Key key);

  uint64_t sum_keys();
  AverageResult average_where_gt(Key threshold);
  std::optional<Key> max_key();

  uint64_t size() const { return pager_.header().key_count; }
  uint64_t epoch() const { return epoch_; }
  TreeStats stats();
  // Throws CorruptionError describing the first violated invariant.
  void check_invariants();

  void set_tracing(bool on) { tracing_ = on; }
  const OpTrace& last_trace() const { return trace_; }

 private:
  friend class Cursor;

  const StoreConfig& config() const { return pager_.config(); }
  const uint8_t* read(PageId id) { return pager_.read(id); }
  uint8_t* write(PageId id);
  LeafNode leaf(PageId id);
  LeafNode leaf_mut(PageId id);
  InternalNode internal_mut(PageId id);
  InternalNode internal(PageId id);
  PageId leftmost_leaf();

  void begin_op();
  void end_op();
  PageId new_root_above(PageId node);
  void split_internal(PageId parent, uint32_t index);
  void split_leaf(PageId parent, uint32_t index, Key key, bool erasing);
  PageId try_merge(PageId parent, uint32_t index);
  void collapse_root();
  PageId descend_for_update(Key key, bool erasing, PageId* parent);

  Pager& pager_;
  uint64_t epoch_ = 0;
  bool mutated_ = false;
  bool tracing_ = false;
  OpTrace trace_;
};

}  // namespace packdb
