#include "packdb/keylist.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "packdb/error.h"

namespace packdb {

namespace {

constexpr uint32_t kH = KeyList::kHeaderBytes;
constexpr uint32_t kD = KeyList::kDescriptorBytes;

Key first_key_of(const Codec& c, const CompressedBlock& b) {
  return c.select(b.info, b.payload, 0);
}

// Halves a block at ceil(n/2); the right half is based at its first key.
std::pair<CompressedBlock, CompressedBlock> halve(CodecId id,
                                                  const CompressedBlock& b,
                                                  uint32_t max_keys) {
  const std::vector<Key> keys = decompress_block(id, b);
  const size_t h = (keys.size() + 1) / 2;
  const std::span<const Key> all(keys);
  return {compress_block(id, all.first(h), b.info.start, max_keys),
          compress_block(id, all.subspan(h), keys[h], max_keys)};
}

}  // namespace

KeyList::KeyList(std::span<uint8_t> region, CodecId codec, uint32_t max_keys)
    : region_(region), codec_(&packdb::codec(codec)), max_keys_(max_keys) {
  if (max_keys == 0 || max_keys > kMaxBlockKeys) {
    contract_violation("keylist: invalid block size " +
                       std::to_string(max_keys));
  }
  if (region.size() < kH) contract_violation("keylist: region too small");
  if (capacity() > region.size()) {
    throw CorruptionError("keylist: capacity " + std::to_string(capacity()) +
                          " exceeds its region");
  }
}

void KeyList::init(std::span<uint8_t> region, uint32_t capacity) {
  if (capacity < kH || capacity > region.size()) {
    contract_violation("keylist: bad capacity " + std::to_string(capacity));
  }
  store_le16(region.data(), 0);
  store_le16(region.data() + 2, 0);
  store_le32(region.data() + 4, capacity);
}

uint32_t KeyList::bytes_needed(CodecId codec,
                               std::span<const CompressedBlock> blocks) {
  const Codec& c = packdb::codec(codec);
  uint32_t total = kH;
  for (const auto& b : blocks) total += kD + c.payload_bytes(b.info);
  return total;
}

uint32_t KeyList::capacity() const { return load_le32(region_.data() + 4); }

uint32_t KeyList::block_count() const { return load_le16(region_.data()); }

uint8_t* KeyList::dir(uint32_t i) const {
  return region_.data() + kH + kD * i;
}

uint8_t* KeyList::payload_base() const {
  return region_.data() + kH + kD * block_count();
}

uint32_t KeyList::payload_capacity() const {
  return capacity() - kH - kD * block_count();
}

BlockDescriptor KeyList::descriptor(uint32_t i) const {
  const uint8_t* p = dir(i);
  BlockDescriptor d;
  d.offset = load_le16(p);
  d.n = load_le16(p + 2);
  d.size = load_le16(p + 4);
  d.start = load_le32(p + 6);
  d.last = load_le32(p + 10);
  return d;
}

void KeyList::write_descriptor(uint32_t i, const BlockDescriptor& d) {
  uint8_t* p = dir(i);
  store_le16(p, d.offset);
  store_le16(p + 2, d.n);
  store_le16(p + 4, d.size);
  store_le32(p + 6, d.start);
  store_le32(p + 10, d.last);
  store_le16(p + 14, 0);
}

BlockInfo KeyList::info(uint32_t i) const {
  const BlockDescriptor d = descriptor(i);
  return {d.n, d.size, d.start, d.last};
}

void KeyList::write_info(uint32_t i, const BlockInfo& info) {
  BlockDescriptor d = descriptor(i);
  d.n = static_cast<uint16_t>(info.n);
  d.size = static_cast<uint16_t>(info.meta);
  d.start = info.start;
  d.last = info.last;
  write_descriptor(i, d);
}

std::span<const uint8_t> KeyList::payload(uint32_t i) const {
  const BlockDescriptor d = descriptor(i);
  return {payload_base() + d.offset, codec_->payload_bytes(info(i))};
}

uint32_t KeyList::payload_end() const {
  const uint32_t count = block_count();
  if (count == 0) return 0;
  return descriptor(count - 1).offset +
         codec_->payload_bytes(info(count - 1));
}

uint32_t KeyList::slot_capacity(uint32_t i) const {
  const uint32_t end = i + 1 < block_count() ? descriptor(i + 1).offset
                                             : payload_capacity();
  return end - descriptor(i).offset;
}

std::span<uint8_t> KeyList::slot(uint32_t i) const {
  return {payload_base() + descriptor(i).offset, slot_capacity(i)};
}

uint32_t KeyList::used_bytes() const {
  return kH + kD * block_count() + payload_end();
}

uint32_t KeyList::key_count() const {
  uint32_t total = 0;
  for (uint32_t i = 0; i < block_count(); ++i) total += descriptor(i).n;
  return total;
}

uint32_t KeyList::gap_count() const {
  uint32_t gaps = 0;
  for (uint32_t i = 0; i < block_count(); ++i) gaps += descriptor(i).n == 0;
  return gaps;
}

uint32_t KeyList::keys_before(uint32_t i) const {
  uint32_t total = 0;
  for (uint32_t j = 0; j < i; ++j) total += descriptor(j).n;
  return total;
}

void KeyList::set_capacity(uint32_t capacity) {
  if (capacity < used_bytes() || capacity > region_.size()) {
    contract_violation("keylist: capacity " + std::to_string(capacity) +
                       " outside [" + std::to_string(used_bytes()) + ", " +
                       std::to_string(region_.size()) + "]");
  }
  store_le32(region_.data() + 4, capacity);
}

uint32_t KeyList::locate_block(Key key) const {
  const uint32_t count = block_count();
  uint32_t first = count;
  uint32_t found = count;
  for (uint32_t i = 0; i < count; ++i) {
    const BlockDescriptor d = descriptor(i);
    if (d.n == 0) continue;
    if (first == count) first = i;
    if (d.start > key) break;
    found = i;
  }
  return found != count ? found : first;
}

std::optional<KlHit> KeyList::lower_bound(Key key) const {
  const uint32_t count = block_count();
  const uint32_t i = locate_block(key);
  if (i == count) return std::nullopt;
  const BlockInfo bi = info(i);
  if (auto hit = codec_->lower_bound(bi, payload(i), key)) {
    return KlHit{keys_before(i) + hit->index, hit->key};
  }
  uint32_t base = keys_before(i) + bi.n;
  for (uint32_t j = i + 1; j < count; ++j) {
    const BlockInfo next = info(j);
    if (next.n == 0) continue;
    return KlHit{base, codec_->select(next, payload(j), 0)};
  }
  return std::nullopt;
}

std::optional<KlHit> KeyList::find(Key key) const {
  auto hit = lower_bound(key);
  if (hit && hit->key == key) return hit;
  return std::nullopt;
}

Key KeyList::select(uint32_t slot) const {
  for (uint32_t i = 0; i < block_count(); ++i) {
    const BlockInfo bi = info(i);
    if (slot < bi.n) return codec_->select(bi, payload(i), slot);
    slot -= bi.n;
  }
  contract_violation("keylist: select out of range");
}

std::optional<Key> KeyList::first_key() const {
  for (uint32_t i = 0; i < block_count(); ++i) {
    const BlockInfo bi = info(i);
    if (bi.n > 0) return codec_->select(bi, payload(i), 0);
  }
  return std::nullopt;
}

std::optional<Key> KeyList::last_key() const {
  for (uint32_t i = block_count(); i-- > 0;) {
    const BlockDescriptor d = descriptor(i);
    if (d.n > 0) return d.last;
  }
  return std::nullopt;
}

bool KeyList::ensure_slot(uint32_t i, uint32_t bytes) {
  const uint32_t cap = slot_capacity(i);
  if (bytes <= cap) return true;
  const uint32_t deficit = bytes - cap;
  const uint32_t count = block_count();
  if (i + 1 == count || free_bytes() < deficit) return false;
  const uint32_t from = descriptor(i + 1).offset;
  uint8_t* base = payload_base();
  std::memmove(base + from + deficit, base + from, payload_end() - from);
  for (uint32_t j = i + 1; j < count; ++j) {
    BlockDescriptor d = descriptor(j);
    d.offset = static_cast<uint16_t>(d.offset + deficit);
    write_descriptor(j, d);
  }
  return true;
}

KlResult KeyList::insert(Key key) {
  KlResult r = insert_once(key);
  if (r.status == KlStatus::kNeedsSpace && vacuumize() > 0) {
    r = insert_once(key);
  }
  return r;
}

KlResult KeyList::insert_once(Key key) {
  const uint32_t i = locate_block(key);
  if (i == block_count()) return insert_structural(key);
  BlockInfo bi = info(i);
  if (key >= bi.start && key <= bi.last) {
    auto hit = codec_->lower_bound(bi, payload(i), key);
    if (hit && hit->key == key) {
      return {KlStatus::kAlreadyExists, keys_before(i) + hit->index};
    }
  }
  if (bi.n >= max_keys_) return insert_structural(key);

  const uint32_t need = codec_->payload_bytes(bi) +
                        codec_->estimate_growth(bi, payload(i), key);
  if (!ensure_slot(i, need)) return {KlStatus::kNeedsSpace, 0};
  const InsertOutcome out = codec_->insert(bi, slot(i), key);
  write_info(i, bi);
  return {KlStatus::kOk, keys_before(i) + out.slot};
}

// Paths that change the number of blocks: a new block next to a full one,
// or halving a full block. They rebuild the KeyList, dropping gaps.
KlResult KeyList::insert_structural(Key key) {
  const CodecId id = codec_->id();
  std::vector<CompressedBlock> blocks = extract();
  size_t target = 0;

  if (blocks.empty()) {
    const Key k[1] = {key};
    blocks.push_back(compress_block(id, k, key, max_keys_));
  } else {
    size_t j = 0;
    for (size_t b = 0; b < blocks.size() && blocks[b].info.start <= key; ++b) {
      j = b;
    }
    const Key k[1] = {key};
    if (key > blocks[j].info.last) {
      if (j + 1 < blocks.size() && blocks[j + 1].info.n < max_keys_) {
        target = j + 1;
        packdb::insert(id, blocks[target], key);
      } else {
        target = j + 1;
        blocks.insert(blocks.begin() + static_cast<ptrdiff_t>(target),
                      compress_block(id, k, key, max_keys_));
      }
    } else if (key < blocks[j].info.start) {
      target = 0;
      blocks.insert(blocks.begin(), compress_block(id, k, key, max_keys_));
    } else {
      auto [lo, hi] = halve(id, blocks[j], max_keys_);
      const bool right = key >= first_key_of(*codec_, hi);
      blocks[j] = std::move(lo);
      blocks.insert(blocks.begin() + static_cast<ptrdiff_t>(j + 1),
                    std::move(hi));
      target = right ? j + 1 : j;
      packdb::insert(id, blocks[target], key);
    }
  }

  uint32_t slot_base = 0;
  for (size_t b = 0; b < target; ++b) slot_base += blocks[b].info.n;
  const std::vector<Key> in_target = decompress_block(id, blocks[target]);
  const auto rank = static_cast<uint32_t>(
      std::lower_bound(in_target.begin(), in_target.end(), key) -
      in_target.begin());
  if (!build(blocks)) return {KlStatus::kNeedsSpace, 0};
  return {KlStatus::kOk, slot_base + rank};
}

KlResult KeyList::erase(Key key) {
  KlResult r = erase_once(key);
  if (r.status == KlStatus::kNeedsSpace && vacuumize() > 0) {
    r = erase_once(key);
  }
  return r;
}

KlResult KeyList::erase_once(Key key) {
  const uint32_t i = locate_block(key);
  if (i == block_count()) return {KlStatus::kNotFound, 0};
  BlockInfo bi = info(i);
  if (key < bi.start || key > bi.last) return {KlStatus::kNotFound, 0};
  const auto hit = codec_->lower_bound(bi, payload(i), key);
  if (!hit || hit->key != key) return {KlStatus::kNotFound, 0};

  DeleteOutcome out = codec_->del(bi, slot(i), hit->index);
  if (!out.applied) {
    if (!ensure_slot(i, out.needed_bytes)) return {KlStatus::kNeedsSpace, 0};
    out = codec_->del(bi, slot(i), hit->index);
    if (!out.applied) {
      throw CorruptionError("keylist: delete did not fit its grown slot");
    }
  }
  write_info(i, bi);
  return {KlStatus::kOk, keys_before(i) + hit->index};
}

uint32_t KeyList::vacuumize() {
  const uint32_t before = used_bytes();
  std::vector<CompressedBlock> blocks = extract();
  if (codec_->repack_on_vacuumize() && !blocks.empty()) {
    const CodecId id = codec_->id();
    const std::vector<Key> keys = decode_all();
    std::vector<CompressedBlock> packed;
    const std::span<const Key> all(keys);
    for (size_t at = 0; at < keys.size(); at += max_keys_) {
      const auto chunk =
          all.subspan(at, std::min<size_t>(max_keys_, keys.size() - at));
      packed.push_back(compress_block(id, chunk, chunk[0], max_keys_));
    }
    if (bytes_needed(id, packed) <= bytes_needed(id, blocks)) {
      blocks = std::move(packed);
    }
  }
  if (!build(blocks)) {
    throw CorruptionError("keylist: vacuumize produced a larger layout");
  }
  return before - used_bytes();
}

std::vector<CompressedBlock> KeyList::extract() const {
  std::vector<CompressedBlock> out;
  for (uint32_t i = 0; i < block_count(); ++i) {
    const BlockInfo bi = info(i);
    if (bi.n == 0) continue;
    const auto p = payload(i);
    out.push_back({bi, std::vector<uint8_t>(p.begin(), p.end())});
  }
  return out;
}

bool KeyList::build(std::span<const CompressedBlock> blocks) {
  const uint32_t need = bytes_needed(codec_->id(), blocks);
  if (need > capacity()) return false;
  const auto count = static_cast<uint32_t>(blocks.size());
  std::vector<uint8_t> tmp(need);
  store_le16(tmp.data(), static_cast<uint16_t>(count));
  store_le16(tmp.data() + 2, 0);
  store_le32(tmp.data() + 4, capacity());
  uint32_t offset = 0;
  uint8_t* payload = tmp.data() + kH + kD * count;
  for (uint32_t i = 0; i < count; ++i) {
    const CompressedBlock& b = blocks[i];
    const uint32_t bytes = codec_->payload_bytes(b.info);
    uint8_t* d = tmp.data() + kH + kD * i;
    store_le16(d, static_cast<uint16_t>(offset));
    store_le16(d + 2, static_cast<uint16_t>(b.info.n));
    store_le16(d + 4, static_cast<uint16_t>(b.info.meta));
    store_le32(d + 6, b.info.start);
    store_le32(d + 10, b.info.last);
    store_le16(d + 14, 0);
    if (bytes > 0) std::memcpy(payload + offset, b.payload.data(), bytes);
    offset += bytes;
  }
  std::memcpy(region_.data(), tmp.data(), need);
  return true;
}

std::vector<Key> KeyList::decode_all() const {
  std::vector<Key> out;
  out.reserve(key_count());
  for_each_block([&](const BlockInfo&, std::span<const Key> keys) {
    out.insert(out.end(), keys.begin(), keys.end());
  });
  return out;
}

void KeyList::for_each_block(
    const std::function<void(const BlockInfo&, std::span<const Key>)>& fn)
    const {
  std::vector<Key> buf(kDecodeBufferSize);
  for (uint32_t i = 0; i < block_count(); ++i) {
    const BlockInfo bi = info(i);
    if (bi.n == 0) continue;
    codec_->decompress(bi, payload(i), buf);
    fn(bi, std::span<const Key>(buf.data(), bi.n));
  }
}

void KeyList::check() const {
  auto fail = [](const std::string& what) {
    throw CorruptionError("keylist: " + what);
  };
  if (capacity() > region_.size()) fail("capacity exceeds region");
  const uint32_t count = block_count();
  if (kH + kD * count > capacity()) fail("directory exceeds capacity");
  if (used_bytes() > capacity()) fail("payload exceeds capacity");
  std::vector<Key> buf(kDecodeBufferSize);
  bool have_prev = false;
  Key prev_last = 0;
  for (uint32_t i = 0; i < count; ++i) {
    const BlockDescriptor d = descriptor(i);
    const BlockInfo bi = info(i);
    const uint32_t bytes = codec_->payload_bytes(bi);
    if (i + 1 < count && d.offset + bytes > descriptor(i + 1).offset) {
      fail("block " + std::to_string(i) + " overlaps its successor");
    }
    if (d.n == 0) continue;
    if (d.n > max_keys_) fail("block " + std::to_string(i) + " over limit");
    if (codec_->meta_is_bit_width() && d.size > 32) fail("bad bit width");
    if (have_prev && d.start <= prev_last) fail("blocks out of order");
    codec_->decompress(bi, payload(i), buf);
    if (buf[0] < d.start) fail("first key below block start");
    for (uint32_t k = 1; k < d.n; ++k) {
      if (buf[k] <= buf[k - 1]) fail("keys not strictly increasing");
    }
    if (have_prev && buf[0] <= prev_last) fail("keys out of order");
    if (buf[d.n - 1] != d.last) fail("cached last key is stale");
    prev_last = d.last;
    have_prev = true;
  }
}

Key kl_split(KeyList& left, KeyList& right) {
  const CodecId id = left.codec_id();
  const Codec& c = codec(id);
  std::vector<CompressedBlock> blocks = left.extract();
  uint32_t keys = 0;
  for (const auto& b : blocks) keys += b.info.n;
  if (keys < 2) contract_violation("kl_split: need at least two keys");
  if (right.key_count() != 0) contract_violation("kl_split: right not empty");

  if (blocks.size() == 1) {
    auto [lo, hi] = halve(id, blocks[0], left.max_keys());
    blocks = {std::move(lo), std::move(hi)};
  }
  std::vector<uint64_t> sizes;
  uint64_t total = 0;
  for (const auto& b : blocks) {
    sizes.push_back(KeyList::kDescriptorBytes + c.payload_bytes(b.info));
    total += sizes.back();
  }
  size_t p = 1;
  uint64_t prefix = sizes[0];
  uint64_t best = prefix * 2 > total ? prefix * 2 - total : total - prefix * 2;
  for (size_t k = 2; k < blocks.size(); ++k) {
    prefix += sizes[k - 1];
    const uint64_t diff =
        prefix * 2 > total ? prefix * 2 - total : total - prefix * 2;
    if (diff < best) {
      best = diff;
      p = k;
    }
  }
  const std::span<const CompressedBlock> all(blocks);
  if (!right.build(all.subspan(p))) {
    contract_violation("kl_split: right half does not fit");
  }
  if (!left.build(all.first(p))) {
    contract_violation("kl_split: left half does not fit");
  }
  return c.select(blocks[p].info, blocks[p].payload, 0);
}

}  // namespace packdb
