#include "packdb/node.h"

#include <gtest/gtest.h>

#include "packdb/error.h"

namespace packdb {
namespace {

TEST(NodeHeader, RoundTrip) {
  std::vector<uint8_t> page(4096);
  NodeHeader h;
  h.leaf = true;
  h.key_count = 17;
  h.left = 3;
  h.right = 9;
  h.write(page.data());
  EXPECT_EQ(page[0], 1);
  EXPECT_EQ(page[1], kLayoutVersion);
  const NodeHeader back = NodeHeader::read(page.data());
  EXPECT_TRUE(back.leaf);
  EXPECT_EQ(back.version, kLayoutVersion);
  EXPECT_EQ(back.key_count, 17u);
  EXPECT_EQ(back.left, 3u);
  EXPECT_EQ(back.right, 9u);
}

TEST(InternalNode, MaxSeparators) {
  StoreConfig c;
  c.page_size = 4096;
  EXPECT_EQ(max_separators(c), (4096u - 32) / 12);
  c.max_separators = 5;
  EXPECT_EQ(max_separators(c), 5u);
}

TEST(InternalNode, InsertRemoveAndRouting) {
  StoreConfig c;
  c.page_size = 4096;
  c.max_separators = 4;
  std::vector<uint8_t> page(4096);
  InternalNode::init(page.data(), 100);
  InternalNode n(page.data(), c);
  EXPECT_EQ(n.count(), 0u);
  EXPECT_EQ(n.child(0), 100u);
  n.insert(0, 50, 101);
  n.insert(1, 80, 102);
  n.insert(0, 20, 103);
  EXPECT_EQ(n.keys(), (std::vector<Key>{20, 50, 80}));
  EXPECT_EQ(n.children(), (std::vector<PageId>{100, 103, 101, 102}));
  EXPECT_EQ(n.child_index(0), 0u);
  EXPECT_EQ(n.child_index(20), 1u);
  EXPECT_EQ(n.child_index(49), 1u);
  EXPECT_EQ(n.child_index(50), 2u);
  EXPECT_EQ(n.child_index(1000), 3u);
  n.insert(3, 90, 104);
  EXPECT_TRUE(n.full());
  EXPECT_THROW(n.insert(0, 1, 1), ContractViolation);
  n.remove(1);
  EXPECT_EQ(n.keys(), (std::vector<Key>{20, 80, 90}));
  EXPECT_EQ(n.children(), (std::vector<PageId>{100, 103, 102, 104}));
  EXPECT_THROW(n.remove(3), ContractViolation);
}

TEST(LeafNode, RecordsFollowKeys) {
  StoreConfig c;
  c.page_size = 4096;
  c.codec = CodecId::kVByte;
  std::vector<uint8_t> page(4096);
  LeafNode::init(page.data(), c);
  LeafNode leaf(page.data(), c);
  EXPECT_EQ(leaf.key_count(), 0u);
  for (Key k : {50u, 10u, 30u, 20u, 40u}) {
    ASSERT_EQ(leaf.insert(k, k * 100), KlStatus::kOk);
  }
  EXPECT_EQ(leaf.insert(30, 1), KlStatus::kAlreadyExists);
  EXPECT_EQ(leaf.keys().decode_all(), (std::vector<Key>{10, 20, 30, 40, 50}));
  EXPECT_EQ(leaf.records(),
            (std::vector<uint64_t>{1000, 2000, 3000, 4000, 5000}));
  ASSERT_EQ(leaf.erase(20), KlStatus::kOk);
  EXPECT_EQ(leaf.erase(20), KlStatus::kNotFound);
  EXPECT_EQ(leaf.records(), (std::vector<uint64_t>{1000, 3000, 4000, 5000}));
  EXPECT_EQ(leaf.record(2), 4000u);
  EXPECT_THROW(leaf.record(4), ContractViolation);
}

TEST(LeafNode, BoundaryMovesWhenOneSideStarves) {
  StoreConfig c;
  c.page_size = 4096;
  c.codec = CodecId::kUncompressed;
  std::vector<uint8_t> page(4096);
  LeafNode::init(page.data(), c);
  LeafNode leaf(page.data(), c);
  const uint32_t initial = leaf.keys().capacity();
  Key k = 0;
  while (leaf.insert(k, k) == KlStatus::kOk) ++k;
  // Records need twice the bytes of keys, so the boundary must have moved
  // below the initial half split, and the page ends up nearly full.
  EXPECT_LT(leaf.keys().capacity(), initial);
  const uint32_t used = leaf.keys().used_bytes() + 8 * leaf.key_count();
  EXPECT_LE(leaf.keys().capacity() + 8 * leaf.key_count(), 4096u - 32);
  EXPECT_LT(4096u - 32 - used, 12u + KeyList::kDescriptorBytes);
  for (Key i = 0; i < k; ++i) ASSERT_EQ(leaf.record(i), i);
}

TEST(LeafNode, KeysOnlyLeafUsesWholePage) {
  StoreConfig c;
  c.page_size = 4096;
  c.record_size = 0;
  std::vector<uint8_t> page(4096);
  LeafNode::init(page.data(), c);
  LeafNode leaf(page.data(), c);
  EXPECT_EQ(leaf.keys().capacity(), 4096u - 32);
  EXPECT_EQ(leaf.record(0), 0u);
}

}  // namespace
}  // namespace packdb
