#include "packdb/node.h"

#include <cstring>
#include <string>

#include "packdb/error.h"

namespace packdb {

NodeHeader NodeHeader::read(const uint8_t* page) {
  NodeHeader h;
  const uint32_t flags = load_le32(page);
  h.leaf = (flags & kLeafFlag) != 0;
  h.version = (flags >> 8) & 0xFF;
  h.key_count = load_le32(page + 4);
  h.left = load_le64(page + 8);
  h.right = load_le64(page + 16);
  h.child = load_le64(page + 24);
  return h;
}

void NodeHeader::write(uint8_t* page) const {
  store_le32(page, (leaf ? kLeafFlag : 0u) | (version << 8));
  store_le32(page + 4, key_count);
  store_le64(page + 8, left);
  store_le64(page + 16, right);
  store_le64(page + 24, child);
}

bool is_leaf(const uint8_t* page) { return (load_le32(page) & kLeafFlag) != 0; }

uint32_t node_key_count(const uint8_t* page) { return load_le32(page + 4); }

uint32_t max_separators(const StoreConfig& config) {
  if (config.max_separators != 0) return config.max_separators;
  return (config.page_size - kNodeHeaderBytes) / 12;
}

// LeafNode

LeafNode::LeafNode(uint8_t* page, const StoreConfig& config)
    : page_(page),
      config_(config),
      max_keys_(block_limits(config.codec, config.block_size).max_keys) {}

void LeafNode::init(uint8_t* page, const StoreConfig& config) {
  NodeHeader h;
  h.leaf = true;
  h.write(page);
  const uint32_t total = config.page_size - kNodeHeaderBytes;
  const uint32_t capacity = config.record_size == 0 ? total : total / 2;
  KeyList::init({page + kNodeHeaderBytes, total}, capacity);
}

void LeafNode::set_siblings(PageId left, PageId right) {
  NodeHeader h = header();
  h.left = left;
  h.right = right;
  h.write(page_);
}

KeyList LeafNode::keys() const {
  return KeyList({page_ + kNodeHeaderBytes,
                  config_.page_size - kNodeHeaderBytes},
                 config_.codec, max_keys_);
}

uint8_t* LeafNode::records_base() const {
  return page_ + kNodeHeaderBytes + keys().capacity();
}

uint32_t LeafNode::record_capacity() const {
  return config_.page_size - kNodeHeaderBytes - keys().capacity();
}

uint64_t LeafNode::record(uint32_t slot) const {
  if (config_.record_size == 0) return 0;
  if (slot >= key_count()) contract_violation("record slot out of range");
  return load_le64(records_base() + 8 * slot);
}

void LeafNode::set_record(uint32_t slot, uint64_t value) {
  if (config_.record_size == 0) return;
  if (slot >= key_count()) contract_violation("record slot out of range");
  store_le64(records_base() + 8 * slot, value);
}

std::vector<uint64_t> LeafNode::records() const {
  std::vector<uint64_t> out;
  if (config_.record_size == 0) return out;
  const uint32_t n = key_count();
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(load_le64(records_base() + 8 * i));
  return out;
}

bool LeafNode::rebalance(uint32_t extra_records) {
  const uint32_t total = config_.page_size - kNodeHeaderBytes;
  KeyList kl = keys();
  const uint64_t kl_used = kl.used_bytes();
  const uint64_t rec_need =
      uint64_t{config_.record_size} * (key_count() + extra_records);
  if (kl_used + rec_need > total) return false;
  const uint64_t free = total - kl_used - rec_need;
  const auto target =
      static_cast<uint32_t>(kl_used + free * kl_used / (kl_used + rec_need));
  const uint32_t current = kl.capacity();
  if (target == current) return false;
  const uint32_t rec_used = config_.record_size * key_count();
  uint8_t* base = page_ + kNodeHeaderBytes;
  std::memmove(base + target, base + current, rec_used);
  kl.set_capacity(target);
  return true;
}

bool LeafNode::grow_keylist(uint32_t extra_records) {
  const uint32_t total = config_.page_size - kNodeHeaderBytes;
  const uint64_t rec_need =
      uint64_t{config_.record_size} * (key_count() + extra_records);
  if (rec_need >= total) return false;
  const auto target = static_cast<uint32_t>(total - rec_need);
  KeyList kl = keys();
  const uint32_t current = kl.capacity();
  if (target <= current) return false;
  uint8_t* base = page_ + kNodeHeaderBytes;
  std::memmove(base + target, base + current,
               config_.record_size * key_count());
  kl.set_capacity(target);
  return true;
}

KlStatus LeafNode::insert(Key key, uint64_t record) {
  const uint32_t rs = config_.record_size;
  const uint32_t n = key_count();
  if (rs != 0 && record_capacity() < rs * (n + 1)) {
    rebalance(1);
    if (record_capacity() < rs * (n + 1)) return KlStatus::kNeedsSpace;
  }
  KlResult r = keys().insert(key);
  if (r.status == KlStatus::kNeedsSpace && grow_keylist(1)) {
    r = keys().insert(key);
  }
  if (r.status != KlStatus::kOk) return r.status;
  if (rs != 0) {
    uint8_t* base = records_base();
    std::memmove(base + 8 * (r.slot + 1), base + 8 * r.slot,
                 8 * (n - r.slot));
    store_le64(base + 8 * r.slot, record);
  }
  store_le32(page_ + 4, n + 1);
  return KlStatus::kOk;
}

KlStatus LeafNode::erase(Key key) {
  const uint32_t n = key_count();
  KlResult r = keys().erase(key);
  if (r.status == KlStatus::kNeedsSpace && grow_keylist(0)) {
    r = keys().erase(key);
  }
  if (r.status != KlStatus::kOk) return r.status;
  if (config_.record_size != 0) {
    uint8_t* base = records_base();
    std::memmove(base + 8 * r.slot, base + 8 * (r.slot + 1),
                 8 * (n - r.slot - 1));
  }
  store_le32(page_ + 4, n - 1);
  return KlStatus::kOk;
}

bool LeafNode::fits(const StoreConfig& config,
                    std::span<const CompressedBlock> blocks) {
  uint64_t n = 0;
  for (const auto& b : blocks) n += b.info.n;
  return KeyList::bytes_needed(config.codec, blocks) +
             config.record_size * n <=
         config.page_size - kNodeHeaderBytes;
}

bool LeafNode::assign(std::span<const CompressedBlock> blocks,
                      std::span<const uint64_t> records) {
  uint32_t n = 0;
  for (const auto& b : blocks) n += b.info.n;
  const uint32_t rs = config_.record_size;
  if (rs != 0 && records.size() != n) {
    contract_violation("leaf assign: record count does not match keys");
  }
  if (!fits(config_, blocks)) return false;
  const uint32_t total = config_.page_size - kNodeHeaderBytes;
  const uint64_t need = KeyList::bytes_needed(config_.codec, blocks);
  const uint64_t rec = uint64_t{rs} * n;
  const uint64_t free = total - need - rec;
  const auto capacity = static_cast<uint32_t>(
      rs == 0 ? total : need + free * need / (need + rec));
  KeyList::init({page_ + kNodeHeaderBytes, total}, capacity);
  keys().build(blocks);
  store_le32(page_ + 4, n);
  if (rs != 0) {
    uint8_t* base = records_base();
    for (uint32_t i = 0; i < n; ++i) store_le64(base + 8 * i, records[i]);
  }
  return true;
}

// InternalNode

InternalNode::InternalNode(uint8_t* page, const StoreConfig& config)
    : page_(page), max_(max_separators(config)) {}

void InternalNode::init(uint8_t* page, PageId leftmost) {
  NodeHeader h;
  h.leaf = false;
  h.child = leftmost;
  h.write(page);
}

uint8_t* InternalNode::key_ptr(uint32_t i) const {
  return page_ + kNodeHeaderBytes + 4 * i;
}

uint8_t* InternalNode::child_ptr(uint32_t i) const {
  return page_ + kNodeHeaderBytes + 4 * max_ + 8 * i;
}

Key InternalNode::key(uint32_t i) const { return load_le32(key_ptr(i)); }

PageId InternalNode::child(uint32_t i) const {
  if (i == 0) return load_le64(page_ + 24);
  return load_le64(child_ptr(i - 1));
}

uint32_t InternalNode::child_index(Key key) const {
  uint32_t lo = 0, hi = count();
  while (lo < hi) {
    const uint32_t mid = (lo + hi) / 2;
    if (this->key(mid) <= key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

void InternalNode::insert(uint32_t i, Key key, PageId right) {
  const uint32_t n = count();
  if (n >= max_) contract_violation("internal node is full");
  if (i > n) contract_violation("separator index out of range");
  std::memmove(key_ptr(i + 1), key_ptr(i), 4 * (n - i));
  std::memmove(child_ptr(i + 1), child_ptr(i), 8 * (n - i));
  store_le32(key_ptr(i), key);
  store_le64(child_ptr(i), right);
  store_le32(page_ + 4, n + 1);
}

void InternalNode::remove(uint32_t i) {
  const uint32_t n = count();
  if (i >= n) contract_violation("separator index out of range");
  std::memmove(key_ptr(i), key_ptr(i + 1), 4 * (n - i - 1));
  std::memmove(child_ptr(i), child_ptr(i + 1), 8 * (n - i - 1));
  store_le32(page_ + 4, n - 1);
}

std::vector<Key> InternalNode::keys() const {
  std::vector<Key> out(count());
  for (uint32_t i = 0; i < out.size(); ++i) out[i] = key(i);
  return out;
}

std::vector<PageId> InternalNode::children() const {
  std::vector<PageId> out(count() + 1);
  for (uint32_t i = 0; i < out.size(); ++i) out[i] = child(i);
  return out;
}

void InternalNode::assign(std::span<const Key> keys,
                          std::span<const PageId> children) {
  if (keys.size() > max_ || children.size() != keys.size() + 1) {
    contract_violation("internal assign: bad sizes");
  }
  store_le64(page_ + 24, children[0]);
  for (uint32_t i = 0; i < keys.size(); ++i) {
    store_le32(key_ptr(i), keys[i]);
    store_le64(child_ptr(i), children[i + 1]);
  }
  store_le32(page_ + 4, static_cast<uint32_t>(keys.size()));
}

}  // namespace packdb
