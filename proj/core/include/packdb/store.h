#pragma once

// Single-file page store. Page 0 holds the file header; every other page is
// either a tree node or a freelist entry. Pages are loaded on first access
// and kept in memory until the store is closed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <unordered_set>
#include <vector>

#include "packdb/codec.h"

namespace packdb {

using PageId = uint64_t;

inline constexpr uint32_t kDefaultPageSize = 16384;
inline constexpr uint32_t kFormatVersion = 1;
inline constexpr uint8_t kKeyTypeU32 = 1;

struct StoreConfig {
  uint32_t page_size = kDefaultPageSize;
  CodecId codec = CodecId::kUncompressed;
  uint32_t block_size = 0;   // 0: codec default; otherwise 128 or 256
  uint32_t record_size = 8;  // 0 (keys only) or 8
  // Caps separators per internal node; 0 derives it from the page size.
  uint32_t max_separators = 0;

  friend bool operator==(const StoreConfig&, const StoreConfig&) = default;
};

// Little-endian layout at the start of page 0:
//   0  u8[8] magic          40 u64 freelist head
//   8  u32 version          48 u64 page count (including page 0)
//  12  u32 page size        56 u64 free page count
//  16  u8  codec            64 u64 key count
//  17  u8  key type         72 u32 tree height
//  18  u16 block size       76 u32 reserved
//  20  u32 record size
//  24  u32 max separators
//  28  u32 reserved
//  32  u64 root page
struct FileHeader {
  StoreConfig config;
  PageId root = 0;
  PageId freelist_head = 0;
  uint64_t page_count = 1;
  uint64_t free_count = 0;
  uint64_t key_count = 0;
  uint32_t height = 0;

  static constexpr uint32_t kEncodedBytes = 80;
  void encode(uint8_t* out) const;
  // Throws FormatError on a bad magic, version or configuration.
  static FileHeader decode(const uint8_t* in, size_t size);
};

// Validates a configuration, throwing ContractViolation when invalid.
void validate_config(const StoreConfig& config);

class Pager {
 public:
  static std::unique_ptr<Pager> create(const std::filesystem::path& path,
                                       const StoreConfig& config);
  static std::unique_ptr<Pager> open(const std::filesystem::path& path);
  static std::unique_ptr<Pager> in_memory(const StoreConfig& config);

  ~Pager();
  Pager(const Pager&) = delete;
  Pager& operator=(const Pager&) = delete;

  const FileHeader& header() const { return header_; }
  FileHeader& header() { return header_; }
  const StoreConfig& config() const { return header_.config; }
  uint32_t page_size() const { return header_.config.page_size; }
  bool is_open() const { return open_; }
  bool persistent() const { return file_ != nullptr; }

  const uint8_t* read(PageId id);
  // Returns the page for modification and marks it dirty.
  uint8_t* write(PageId id);

  // Reuses the freelist head before growing the file. The page is zeroed.
  PageId alloc();
  void free(PageId id);
  bool is_free(PageId id) const { return free_set_.count(id) != 0; }
  std::vector<PageId> free_pages() const;

  // Limits the page count (0 = unlimited); alloc beyond it throws
  // ResourceError.
  void set_page_limit(uint64_t pages) { page_limit_ = pages; }

  void flush();
  void close();

  uint64_t page_writes() const { return page_writes_; }
  uint64_t header_writes() const { return header_writes_; }
  size_t dirty_count() const;

  // Records every page handed out by write(), alloc() or free() until the
  // next begin_trace().
  void begin_trace();
  void end_trace() { tracing_ = false; }
  const std::set<PageId>& traced() const { return traced_; }

 private:
  Pager() = default;
  void check_open() const;
  void check_id(PageId id) const;
  uint8_t* load(PageId id);
  void touch(PageId id);
  void write_header();

  FileHeader header_;
  std::FILE* file_ = nullptr;
  bool open_ = false;
  std::vector<std::unique_ptr<uint8_t[]>> pages_;
  std::vector<uint8_t> dirty_;
  std::unordered_set<PageId> free_set_;
  uint64_t page_limit_ = 0;
  uint64_t page_writes_ = 0;
  uint64_t header_writes_ = 0;
  bool tracing_ = false;
  std::set<PageId> traced_;
};

}  // namespace packdb
