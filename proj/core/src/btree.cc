#include "packdb/btree.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

#include "packdb/error.h"

namespace packdb {

// Cursor

Cursor::Cursor(BTree* tree)
    : tree_(tree), epoch_(tree->epoch_), cache_(kDecodeBufferSize) {}

void Cursor::check() const {
  if (epoch_ != tree_->epoch_) {
    throw CursorInvalidated("cursor used after the tree was modified");
  }
}

void Cursor::load_from(PageId leaf, uint32_t block) {
  const Codec& c = codec(tree_->config().codec);
  while (leaf != 0) {
    LeafNode node = tree_->leaf(leaf);
    const KeyList kl = node.keys();
    for (; block < kl.block_count(); ++block) {
      const BlockInfo bi = kl.info(block);
      if (bi.n == 0) continue;
      c.decompress(bi, kl.payload(block), cache_);
      leaf_ = leaf;
      block_ = block;
      cache_n_ = bi.n;
      pos_ = 0;
      valid_ = true;
      return;
    }
    leaf = node.header().right;
    block = 0;
    slot_base_ = 0;
  }
  valid_ = false;
}

void Cursor::seek(PageId leaf, Key key) {
  LeafNode node = tree_->leaf(leaf);
  const KeyList kl = node.keys();
  uint32_t base = 0;
  for (uint32_t b = 0; b < kl.block_count(); ++b) {
    const BlockInfo bi = kl.info(b);
    if (bi.n == 0 || bi.last < key) {
      base += bi.n;
      continue;
    }
    load_from(leaf, b);
    slot_base_ = base;
    while (cache_[pos_] < key) ++pos_;
    return;
  }
  slot_base_ = 0;
  load_from(node.header().right, 0);
}

Key Cursor::key() const {
  check();
  if (!valid_) contract_violation("cursor is at the end");
  return cache_[pos_];
}

uint64_t Cursor::record() const {
  check();
  if (!valid_) contract_violation("cursor is at the end");
  return tree_->leaf(leaf_).record(slot_base_ + pos_);
}

bool Cursor::next() {
  check();
  if (!valid_) return false;
  if (++pos_ < cache_n_) return true;
  slot_base_ += cache_n_;
  load_from(leaf_, block_ + 1);
  return valid_;
}

// BTree

BTree::BTree(Pager& pager) : pager_(pager) {
  FileHeader& h = pager_.header();
  if (h.root == 0) {
    h.root = pager_.alloc();
    LeafNode::init(pager_.write(h.root), config());
    h.height = 1;
  }
}

uint8_t* BTree::write(PageId id) {
  mutated_ = true;
  return pager_.write(id);
}

LeafNode BTree::leaf(PageId id) {
  return LeafNode(const_cast<uint8_t*>(pager_.read(id)), config());
}

LeafNode BTree::leaf_mut(PageId id) { return LeafNode(write(id), config()); }

InternalNode BTree::internal(PageId id) {
  return InternalNode(const_cast<uint8_t*>(pager_.read(id)), config());
}

InternalNode BTree::internal_mut(PageId id) {
  return InternalNode(write(id), config());
}

PageId BTree::leftmost_leaf() {
  PageId id = pager_.header().root;
  while (!is_leaf(read(id))) id = internal(id).child(0);
  return id;
}

void BTree::begin_op() {
  mutated_ = false;
  trace_ = OpTrace{};
  if (tracing_) pager_.begin_trace();
}

void BTree::end_op() {
  if (mutated_) ++epoch_;
  if (tracing_) {
    trace_.dirtied = pager_.traced();
    pager_.end_trace();
  }
}

PageId BTree::new_root_above(PageId node) {
  mutated_ = true;
  const PageId root = pager_.alloc();
  InternalNode::init(write(root), node);
  pager_.header().root = root;
  ++pager_.header().height;
  TraceEvent e;
  e.kind = TraceEvent::Kind::kRootSplit;
  e.leaf = is_leaf(read(node));
  e.node = node;
  e.parent = root;
  trace_.events.push_back(e);
  trace_.path.insert(trace_.path.begin(), root);
  return root;
}

void BTree::split_internal(PageId parent, uint32_t index) {
  InternalNode p = internal(parent);
  const PageId x = p.child(index);
  TraceEvent e;
  e.kind = TraceEvent::Kind::kSplit;
  e.node = x;
  e.parent = parent;
  e.parent_had_room = !p.full();
  if (p.full()) contract_violation("split below a full parent");

  InternalNode xn = internal(x);
  const std::vector<Key> keys = xn.keys();
  const std::vector<PageId> children = xn.children();
  const size_t mid = keys.size() / 2;
  const std::span<const Key> k(keys);
  const std::span<const PageId> c(children);

  const PageId r = pager_.alloc();
  InternalNode::init(write(r), children[mid + 1]);
  internal_mut(r).assign(k.subspan(mid + 1), c.subspan(mid + 1));
  internal_mut(x).assign(k.first(mid), c.first(mid + 1));
  internal_mut(parent).insert(index, keys[mid], r);
  e.sibling = r;
  trace_.events.push_back(e);
}

void BTree::split_leaf(PageId parent, uint32_t index, Key key, bool erasing) {
  InternalNode p = internal(parent);
  const PageId l = p.child(index);
  TraceEvent e;
  e.kind = TraceEvent::Kind::kSplit;
  e.leaf = true;
  e.during_erase = erasing;
  e.node = l;
  e.parent = parent;
  e.parent_had_room = !p.full();
  if (p.full()) contract_violation("split below a full parent");

  LeafNode ln = leaf_mut(l);
  const NodeHeader lh = ln.header();
  const PageId r = pager_.alloc();
  LeafNode::init(write(r), config());
  LeafNode rn = leaf_mut(r);
  const auto last = ln.keys().last_key();

  Key pivot = key;
  if (erasing || lh.right != 0 || (last && key <= *last)) {
    if (ln.key_count() < 2) {
      throw ResourceError("leaf with one key does not fit its page");
    }
    const std::vector<uint64_t> records = ln.records();
    KeyList lk = ln.keys();
    const uint32_t total = config().page_size - kNodeHeaderBytes;
    std::vector<uint8_t> scratch(total);
    KeyList::init(scratch, total);
    KeyList rk(scratch, config().codec, lk.max_keys());
    pivot = kl_split(lk, rk);
    const std::vector<CompressedBlock> lb = lk.extract();
    const std::vector<CompressedBlock> rb = rk.extract();
    const uint32_t lc = lk.key_count();
    const std::span<const uint64_t> recs(records);
    const bool keyed = config().record_size != 0;
    if (!ln.assign(lb, keyed ? recs.first(lc) : recs) ||
        !rn.assign(rb, keyed ? recs.subspan(lc) : recs)) {
      throw CorruptionError("leaf halves do not fit a page");
    }
  }
  // Otherwise the key goes past the end of the rightmost leaf: it starts a
  // new, empty leaf and the full one is left as is.

  rn.set_siblings(l, lh.right);
  if (lh.right != 0) {
    LeafNode next = leaf_mut(lh.right);
    next.set_siblings(r, next.header().right);
    e.neighbor = lh.right;
  }
  ln.set_siblings(lh.left, r);
  internal_mut(parent).insert(index, pivot, r);
  e.sibling = r;
  trace_.events.push_back(e);
}

PageId BTree::try_merge(PageId parent, uint32_t index) {
  const uint32_t n = internal(parent).count();
  auto attempt = [&](uint32_t li) -> PageId {
    InternalNode p = internal(parent);
    const PageId l = p.child(li);
    const PageId c = p.child(li + 1);
    TraceEvent e;
    e.kind = TraceEvent::Kind::kMerge;
    e.during_erase = true;
    e.node = l;
    e.sibling = c;
    e.parent = parent;
    if (is_leaf(read(l))) {
      e.leaf = true;
      LeafNode ln = leaf(l);
      LeafNode cn = leaf(c);
      std::vector<CompressedBlock> blocks = ln.keys().extract();
      std::vector<CompressedBlock> right = cn.keys().extract();
      blocks.insert(blocks.end(), std::make_move_iterator(right.begin()),
                    std::make_move_iterator(right.end()));
      if (!LeafNode::fits(config(), blocks)) return 0;
      std::vector<uint64_t> records = ln.records();
      const std::vector<uint64_t> rr = cn.records();
      records.insert(records.end(), rr.begin(), rr.end());
      const NodeHeader lh = ln.header();
      const PageId next = cn.header().right;
      LeafNode lw = leaf_mut(l);
      lw.assign(blocks, records);
      lw.set_siblings(lh.left, next);
      if (next != 0) {
        LeafNode nn = leaf_mut(next);
        nn.set_siblings(l, nn.header().right);
        e.neighbor = next;
      }
    } else {
      InternalNode ln = internal(l);
      InternalNode cn = internal(c);
      if (ln.count() + cn.count() + 2 > ln.capacity()) return 0;
      std::vector<Key> keys = ln.keys();
      keys.push_back(p.key(li));
      const std::vector<Key> ck = cn.keys();
      keys.insert(keys.end(), ck.begin(), ck.end());
      std::vector<PageId> children = ln.children();
      const std::vector<PageId> cc = cn.children();
      children.insert(children.end(), cc.begin(), cc.end());
      internal_mut(l).assign(keys, children);
    }
    mutated_ = true;
    pager_.free(c);
    internal_mut(parent).remove(li);
    trace_.events.push_back(e);
    return l;
  };
  if (n == 0) return 0;
  if (index > 0) {
    if (PageId m = attempt(index - 1)) return m;
  }
  if (index < n) return attempt(index);
  return 0;
}

void BTree::collapse_root() {
  const PageId root = pager_.header().root;
  const PageId child = internal(root).child(0);
  mutated_ = true;
  pager_.header().root = child;
  --pager_.header().height;
  pager_.free(root);
  TraceEvent e;
  e.kind = TraceEvent::Kind::kRootCollapse;
  e.node = root;
  e.sibling = child;
  trace_.events.push_back(e);
}

PageId BTree::descend_for_update(Key key, bool erasing, PageId* parent_out) {
  const bool presplit = !erasing || !codec(config().codec).delete_stable();
  FileHeader& h = pager_.header();
  if (!is_leaf(read(h.root)) && presplit && internal(h.root).full()) {
    const PageId old = h.root;
    split_internal(new_root_above(old), 0);
  }
  while (erasing && !is_leaf(read(h.root)) && internal(h.root).count() == 0) {
    collapse_root();
  }
  PageId id = h.root;
  PageId parent = 0;
  trace_.path = {id};
  while (!is_leaf(read(id))) {
    uint32_t j = internal(id).child_index(key);
    PageId c = internal(id).child(j);
    if (presplit && !is_leaf(read(c)) && internal(c).full()) {
      split_internal(id, j);
      j = internal(id).child_index(key);
      c = internal(id).child(j);
    }
    if (erasing && node_key_count(read(c)) < 4) {
      if (const PageId m = try_merge(id, j)) {
        c = m;
        if (id == h.root && internal(id).count() == 0) {
          collapse_root();
          id = c;
          parent = 0;
          trace_.path = {id};
          continue;
        }
      }
    }
    parent = id;
    id = c;
    trace_.path.push_back(id);
  }
  *parent_out = parent;
  return id;
}

OpStatus BTree::insert(Key key, uint64_t record) {
  begin_op();
  PageId parent = 0;
  PageId id = descend_for_update(key, false, &parent);
  if (leaf(id).keys().find(key)) {
    end_op();
    return OpStatus::kAlreadyExists;
  }
  KlStatus s = leaf_mut(id).insert(key, record);
  if (s == KlStatus::kNeedsSpace) {
    if (parent == 0) parent = new_root_above(id);
    split_leaf(parent, internal(parent).child_index(key), key, false);
    id = internal(parent).child(internal(parent).child_index(key));
    trace_.path.back() = id;
    s = leaf_mut(id).insert(key, record);
    if (s == KlStatus::kNeedsSpace) {
      end_op();
      throw ResourceError("key does not fit a freshly split leaf");
    }
  }
  ++pager_.header().key_count;
  end_op();
  return OpStatus::kOk;
}

OpStatus BTree::erase(Key key) {
  begin_op();
  PageId parent = 0;
  PageId id = descend_for_update(key, true, &parent);
  if (!leaf(id).keys().find(key)) {
    end_op();
    return OpStatus::kNotFound;
  }
  KlStatus s = leaf_mut(id).erase(key);
  if (s == KlStatus::kNeedsSpace) {
    // Removing the key grows its block past the page: split, then retry.
    if (parent == 0) parent = new_root_above(id);
    split_leaf(parent, internal(parent).child_index(key), key, true);
    id = internal(parent).child(internal(parent).child_index(key));
    trace_.path.back() = id;
    s = leaf_mut(id).erase(key);
    if (s == KlStatus::kNeedsSpace) {
      end_op();
      throw ResourceError("delete does not fit a freshly split leaf");
    }
  }
  --pager_.header().key_count;
  end_op();
  return OpStatus::kOk;
}

std::optional<uint64_t> BTree::find(Key key) {
  PageId id = pager_.header().root;
  while (!is_leaf(read(id))) {
    InternalNode n = internal(id);
    id = n.child(n.child_index(key));
  }
  LeafNode ln = leaf(id);
  const auto hit = ln.keys().find(key);
  if (!hit) return std::nullopt;
  return ln.record(hit->slot);
}

Cursor BTree::cursor_first() {
  Cursor c(this);
  c.load_from(leftmost_leaf(), 0);
  return c;
}

Cursor BTree::cursor_lower_bound(Key key) {
  PageId id = pager_.header().root;
  while (!is_leaf(read(id))) {
    InternalNode n = internal(id);
    id = n.child(n.child_index(key));
  }
  Cursor c(this);
  c.seek(id, key);
  return c;
}

uint64_t BTree::sum_keys() {
  const Codec& c = codec(config().codec);
  std::vector<Key> buf(kDecodeBufferSize);
  uint64_t sum = 0;
  for (PageId id = leftmost_leaf(); id != 0;) {
    LeafNode ln = leaf(id);
    const KeyList kl = ln.keys();
    for (uint32_t b = 0; b < kl.block_count(); ++b) {
      const BlockInfo bi = kl.info(b);
      if (bi.n == 0) continue;
      c.decompress(bi, kl.payload(b), buf);
      for (uint32_t i = 0; i < bi.n; ++i) sum += buf[i];
    }
    id = ln.header().right;
  }
  return sum;
}

AverageResult BTree::average_where_gt(Key threshold) {
  AverageResult out;
  if (threshold == std::numeric_limits<Key>::max()) return out;
  const Codec& c = codec(config().codec);
  std::vector<Key> buf(kDecodeBufferSize);
  PageId id = pager_.header().root;
  while (!is_leaf(read(id))) {
    InternalNode n = internal(id);
    id = n.child(n.child_index(threshold + 1));
  }
  for (; id != 0;) {
    LeafNode ln = leaf(id);
    const KeyList kl = ln.keys();
    for (uint32_t b = 0; b < kl.block_count(); ++b) {
      const BlockInfo bi = kl.info(b);
      if (bi.n == 0 || bi.last <= threshold) continue;
      c.decompress(bi, kl.payload(b), buf);
      for (uint32_t i = 0; i < bi.n; ++i) {
        if (buf[i] > threshold) {
          out.sum += buf[i];
          ++out.count;
        }
      }
    }
    id = ln.header().right;
  }
  return out;
}

std::optional<Key> BTree::max_key() {
  PageId id = pager_.header().root;
  while (!is_leaf(read(id))) {
    InternalNode n = internal(id);
    id = n.child(n.count());
  }
  // Trailing leaves may be empty; walk left to the first populated one.
  while (id != 0) {
    LeafNode ln = leaf(id);
    if (auto last = ln.keys().last_key()) return last;
    id = ln.header().left;
  }
  return std::nullopt;
}

TreeStats BTree::stats() {
  TreeStats s;
  s.height = pager_.header().height;
  std::vector<PageId> level = {pager_.header().root};
  while (!level.empty()) {
    std::vector<PageId> next;
    for (PageId id : level) {
      ++s.live_pages;
      if (is_leaf(read(id))) {
        const KeyList kl = leaf(id).keys();
        ++s.leaves;
        const uint32_t n = kl.key_count();
        s.keys += n;
        s.empty_leaves += n == 0;
        s.blocks += kl.block_count();
        s.gaps += kl.gap_count();
        s.keylist_bytes += kl.used_bytes();
      } else {
        ++s.internal_nodes;
        for (PageId c : internal(id).children()) next.push_back(c);
      }
    }
    level = std::move(next);
  }
  return s;
}

void BTree::check_invariants() {
  auto fail = [](const std::string& what) {
    throw CorruptionError("tree invariant violated: " + what);
  };
  const FileHeader& h = pager_.header();
  std::vector<PageId> leaves;
  std::set<PageId> seen;
  uint64_t keys = 0;
  uint32_t leaf_depth = 0;
  const uint32_t rs = config().record_size;

  std::function<void(PageId, std::optional<Key>, std::optional<Key>,
                     uint32_t)>
      visit = [&](PageId id, std::optional<Key> lo, std::optional<Key> hi,
                  uint32_t depth) {
        if (id == 0 || id >= h.page_count) fail("child id out of range");
        if (!seen.insert(id).second) fail("page reachable twice");
        if (pager_.is_free(id)) fail("reachable page is on the freelist");
        const NodeHeader nh = NodeHeader::read(read(id));
        if (nh.version != kLayoutVersion) fail("unknown node layout");
        const std::string where = " in page " + std::to_string(id);
        if (nh.leaf) {
          if (leaf_depth == 0) leaf_depth = depth;
          if (depth != leaf_depth) fail("leaves at different depths");
          LeafNode ln = leaf(id);
          const KeyList kl = ln.keys();
          kl.check();
          if (kl.key_count() != nh.key_count) fail("key count" + where);
          if (ln.record_capacity() < rs * nh.key_count) {
            fail("records overflow" + where);
          }
          if (kl.used_bytes() + ln.record_capacity() + kNodeHeaderBytes >
              config().page_size) {
            fail("node space" + where);
          }
          const auto first = kl.first_key();
          const auto last = kl.last_key();
          if (first && lo && *first < *lo) fail("key below separator" + where);
          if (last && hi && *last >= *hi) fail("key above separator" + where);
          keys += nh.key_count;
          leaves.push_back(id);
          return;
        }
        InternalNode in = internal(id);
        const std::vector<Key> ks = in.keys();
        const std::vector<PageId> cs = in.children();
        if (ks.size() > in.capacity()) fail("separator overflow" + where);
        for (size_t i = 0; i < ks.size(); ++i) {
          if (i > 0 && ks[i] <= ks[i - 1]) fail("separators unsorted" + where);
          if (lo && ks[i] < *lo) fail("separator below range" + where);
          if (hi && ks[i] >= *hi) fail("separator above range" + where);
        }
        for (size_t i = 0; i < cs.size(); ++i) {
          const std::optional<Key> clo = i == 0 ? lo : std::optional(ks[i - 1]);
          const std::optional<Key> chi =
              i == ks.size() ? hi : std::optional(ks[i]);
          visit(cs[i], clo, chi, depth + 1);
        }
      };
  visit(h.root, std::nullopt, std::nullopt, 1);

  if (leaf_depth != h.height) fail("height does not match header");
  for (size_t i = 0; i < leaves.size(); ++i) {
    const NodeHeader nh = NodeHeader::read(read(leaves[i]));
    const PageId want_left = i == 0 ? 0 : leaves[i - 1];
    const PageId want_right = i + 1 == leaves.size() ? 0 : leaves[i + 1];
    if (nh.left != want_left || nh.right != want_right) {
      fail("leaf chain broken at page " + std::to_string(leaves[i]));
    }
  }
  if (keys != h.key_count) {
    fail("header key count " + std::to_string(h.key_count) + " but tree has " +
         std::to_string(keys));
  }
  if (seen.size() + h.free_count + 1 != h.page_count) {
    fail("page census: " + std::to_string(seen.size()) + " live + " +
         std::to_string(h.free_count) + " free + 1 != " +
         std::to_string(h.page_count));
  }
}

}  // namespace packdb
