#include "packdb/store.h"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <string>

#include "packdb/error.h"

namespace packdb {

namespace {

constexpr uint8_t kMagic[8] = {'P', 'A', 'C', 'K', 'D', 'B', 0x0D, 0x0A};

std::string errno_text() { return std::strerror(errno); }

}  // namespace

void validate_config(const StoreConfig& c) {
  if (c.page_size < 4096 || c.page_size > 65536 ||
      (c.page_size & (c.page_size - 1)) != 0) {
    contract_violation("page size must be a power of two in [4096, 65536]");
  }
  if (static_cast<uint8_t>(c.codec) > static_cast<uint8_t>(CodecId::kSimdFor)) {
    contract_violation("unknown codec");
  }
  if (c.block_size != 0 && c.block_size != 128 && c.block_size != 256) {
    contract_violation("block size must be 128 or 256");
  }
  if (c.record_size != 0 && c.record_size != 8) {
    contract_violation("record size must be 0 or 8");
  }
  const uint32_t fanout = (c.page_size - 32) / 12;
  if (c.max_separators != 0 &&
      (c.max_separators < 3 || c.max_separators > fanout)) {
    contract_violation("max separators must be in [3, " +
                       std::to_string(fanout) + "]");
  }
}

void FileHeader::encode(uint8_t* out) const {
  std::memset(out, 0, kEncodedBytes);
  std::memcpy(out, kMagic, sizeof(kMagic));
  store_le32(out + 8, kFormatVersion);
  store_le32(out + 12, config.page_size);
  out[16] = static_cast<uint8_t>(config.codec);
  out[17] = kKeyTypeU32;
  store_le16(out + 18, static_cast<uint16_t>(config.block_size));
  store_le32(out + 20, config.record_size);
  store_le32(out + 24, config.max_separators);
  store_le64(out + 32, root);
  store_le64(out + 40, freelist_head);
  store_le64(out + 48, page_count);
  store_le64(out + 56, free_count);
  store_le64(out + 64, key_count);
  store_le32(out + 72, height);
}

FileHeader FileHeader::decode(const uint8_t* in, size_t size) {
  if (size < kEncodedBytes) throw FormatError("file header truncated");
  if (std::memcmp(in, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a packdb file (bad magic)");
  }
  const uint32_t version = load_le32(in + 8);
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
  if (in[17] != kKeyTypeU32) throw FormatError("unsupported key type");
  FileHeader h;
  h.config.page_size = load_le32(in + 12);
  h.config.codec = static_cast<CodecId>(in[16]);
  h.config.block_size = load_le16(in + 18);
  h.config.record_size = load_le32(in + 20);
  h.config.max_separators = load_le32(in + 24);
  try {
    validate_config(h.config);
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("bad configuration in header: ") + e.what());
  }
  h.root = load_le64(in + 32);
  h.freelist_head = load_le64(in + 40);
  h.page_count = load_le64(in + 48);
  h.free_count = load_le64(in + 56);
  h.key_count = load_le64(in + 64);
  h.height = load_le32(in + 72);
  if (h.page_count < 1 || h.root >= h.page_count ||
      h.freelist_head >= h.page_count || h.free_count >= h.page_count) {
    throw FormatError("page counters in header are inconsistent");
  }
  return h;
}

std::unique_ptr<Pager> Pager::create(const std::filesystem::path& path,
                                     const StoreConfig& config) {
  validate_config(config);
  std::unique_ptr<Pager> p(new Pager());
  p->header_.config = config;
  p->file_ = std::fopen(path.c_str(), "wb+x");
  if (p->file_ == nullptr) {
    throw IoError("cannot create " + path.string() + ": " + errno_text());
  }
  p->open_ = true;
  p->pages_.resize(1);
  p->dirty_.resize(1, 0);
  p->write_header();
  return p;
}

std::unique_ptr<Pager> Pager::in_memory(const StoreConfig& config) {
  validate_config(config);
  std::unique_ptr<Pager> p(new Pager());
  p->header_.config = config;
  p->open_ = true;
  p->pages_.resize(1);
  p->dirty_.resize(1, 0);
  return p;
}

std::unique_ptr<Pager> Pager::open(const std::filesystem::path& path) {
  std::unique_ptr<Pager> p(new Pager());
  p->file_ = std::fopen(path.c_str(), "rb+");
  if (p->file_ == nullptr) {
    throw IoError("cannot open " + path.string() + ": " + errno_text());
  }
  uint8_t buf[FileHeader::kEncodedBytes];
  const size_t got = std::fread(buf, 1, sizeof(buf), p->file_);
  p->header_ = FileHeader::decode(buf, got);
  if (std::fseek(p->file_, 0, SEEK_END) != 0) {
    throw IoError("seek failed: " + errno_text());
  }
  const long size = std::ftell(p->file_);
  const uint64_t expected = p->header_.page_count * p->page_size();
  if (size < 0 || static_cast<uint64_t>(size) < expected) {
    throw FormatError("file is truncated: " + std::to_string(size) +
                      " bytes, header describes " + std::to_string(expected));
  }
  p->open_ = true;
  p->pages_.resize(p->header_.page_count);
  p->dirty_.resize(p->header_.page_count, 0);
  PageId id = p->header_.freelist_head;
  for (uint64_t i = 0; i < p->header_.free_count; ++i) {
    if (id == 0 || id >= p->header_.page_count || p->free_set_.count(id)) {
      throw FormatError("freelist is corrupt");
    }
    p->free_set_.insert(id);
    id = load_le64(p->load(id));
  }
  return p;
}

Pager::~Pager() {
  try {
    close();
  } catch (...) {
    // Errors on implicit close are dropped; call close() to observe them.
  }
}

void Pager::check_open() const {
  if (!open_) contract_violation("store is closed");
}

void Pager::check_id(PageId id) const {
  check_open();
  if (id == 0 || id >= header_.page_count) {
    contract_violation("page id " + std::to_string(id) + " out of range");
  }
}

uint8_t* Pager::load(PageId id) {
  auto& slot = pages_[id];
  if (slot) return slot.get();
  slot = std::make_unique<uint8_t[]>(page_size());
  if (file_ != nullptr) {
    const auto offset = static_cast<long>(id * page_size());
    if (std::fseek(file_, offset, SEEK_SET) != 0 ||
        std::fread(slot.get(), 1, page_size(), file_) != page_size()) {
      slot.reset();
      throw IoError("cannot read page " + std::to_string(id));
    }
  } else {
    std::memset(slot.get(), 0, page_size());
  }
  return slot.get();
}

void Pager::touch(PageId id) {
  dirty_[id] = 1;
  if (tracing_) traced_.insert(id);
}

const uint8_t* Pager::read(PageId id) {
  check_id(id);
  return load(id);
}

uint8_t* Pager::write(PageId id) {
  check_id(id);
  if (free_set_.count(id)) {
    contract_violation("write to free page " + std::to_string(id));
  }
  uint8_t* p = load(id);
  touch(id);
  return p;
}

PageId Pager::alloc() {
  check_open();
  PageId id;
  if (header_.freelist_head != 0) {
    id = header_.freelist_head;
    header_.freelist_head = load_le64(load(id));
    --header_.free_count;
    free_set_.erase(id);
  } else {
    if (page_limit_ != 0 && header_.page_count >= page_limit_) {
      throw ResourceError("page limit of " + std::to_string(page_limit_) +
                          " pages reached");
    }
    id = header_.page_count++;
    // Not on disk yet, so never read it back.
    pages_.push_back(std::make_unique<uint8_t[]>(page_size()));
    dirty_.push_back(0);
  }
  std::memset(load(id), 0, page_size());
  touch(id);
  return id;
}

void Pager::free(PageId id) {
  check_id(id);
  if (free_set_.count(id)) {
    contract_violation("double free of page " + std::to_string(id));
  }
  uint8_t* p = load(id);
  std::memset(p, 0, page_size());
  store_le64(p, header_.freelist_head);
  header_.freelist_head = id;
  ++header_.free_count;
  free_set_.insert(id);
  touch(id);
}

std::vector<PageId> Pager::free_pages() const {
  std::vector<PageId> out(free_set_.begin(), free_set_.end());
  std::sort(out.begin(), out.end());
  return out;
}

size_t Pager::dirty_count() const {
  return static_cast<size_t>(std::count(dirty_.begin(), dirty_.end(), 1));
}

void Pager::begin_trace() {
  traced_.clear();
  tracing_ = true;
}

void Pager::write_header() {
  std::vector<uint8_t> page(page_size(), 0);
  header_.encode(page.data());
  if (std::fseek(file_, 0, SEEK_SET) != 0 ||
      std::fwrite(page.data(), 1, page.size(), file_) != page.size()) {
    throw IoError("cannot write file header: " + errno_text());
  }
  ++header_writes_;
}

void Pager::flush() {
  check_open();
  if (file_ == nullptr) {
    std::fill(dirty_.begin(), dirty_.end(), 0);
    return;
  }
  for (PageId id = 1; id < header_.page_count; ++id) {
    if (!dirty_[id]) continue;
    const auto offset = static_cast<long>(id * page_size());
    if (std::fseek(file_, offset, SEEK_SET) != 0 ||
        std::fwrite(pages_[id].get(), 1, page_size(), file_) != page_size()) {
      throw IoError("cannot write page " + std::to_string(id) + ": " +
                    errno_text());
    }
    dirty_[id] = 0;
    ++page_writes_;
  }
  write_header();
  if (std::fflush(file_) != 0) throw IoError("flush failed: " + errno_text());
}

void Pager::close() {
  if (!open_) return;
  flush();
  open_ = false;
  if (file_ != nullptr) {
    const int rc = std::fclose(file_);
    file_ = nullptr;
    if (rc != 0) throw IoError("close failed: " + errno_text());
  }
  pages_.clear();
}

}  // namespace packdb
