#pragma once

// Embedded key store: a B+-tree of sorted 32-bit keys with compressed
// leaves, persisted in a single page file.

#include <filesystem>
#include <memory>
#include <optional>

#include "packdb/btree.h"
#include "packdb/store.h"

namespace packdb {

struct DbStats {
  TreeStats tree;
  uint64_t page_count = 0;
  uint64_t free_pages = 0;
  uint64_t file_bytes = 0;  // page_count * page_size
};

class Database {
 public:
  // Fails with IoError if the file exists.
  static Database create(const std::filesystem::path& path,
                         const StoreConfig& config = {});
  static Database open(const std::filesystem::path& path);
  static Database in_memory(const StoreConfig& config = {});

  Database(Database&&) noexcept;
  Database& operator=(Database&&) noexcept;
  ~Database();

  OpStatus insert(Key key, uint64_t record = 0);
  std::optional<uint64_t> find(Key key);
  bool contains(Key key) { return find(key).has_value(); }
  OpStatus erase(Key key);

  Cursor cursor_first();
  Cursor cursor_lower_bound(Key key);
  uint64_t sum_keys();
  AverageResult average_where_gt(Key threshold);
  std::optional<Key> max_key();

  uint64_t size() const;
  const StoreConfig& config() const;
  DbStats stats();
  void check_invariants();

  void flush();
  // Flushes and releases the file. Further calls are no-ops.
  void close();
  bool is_open() const;

  BTree& tree();
  Pager& pager();

 private:
  Database(std::unique_ptr<Pager> pager);
  BTree& live();

  std::unique_ptr<Pager> pager_;
  std::unique_ptr<BTree> tree_;
};

}  // namespace packdb
