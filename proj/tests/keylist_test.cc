#include "packdb/keylist.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "packdb/error.h"
#include "test_util.h"

namespace packdb {
namespace {

struct Region {
  explicit Region(uint32_t capacity, uint32_t size = 0)
      : bytes(size != 0 ? size : capacity) {
    KeyList::init(bytes, capacity);
  }
  KeyList view(CodecId id, uint32_t max_keys = 0) {
    return KeyList(bytes, id,
                   max_keys != 0 ? max_keys : block_limits(id).max_keys);
  }
  std::vector<uint8_t> bytes;
};

std::vector<Key> range(Key from, Key to) {
  std::vector<Key> out;
  for (Key k = from; k < to; ++k) out.push_back(k);
  return out;
}

TEST(KeyList, EmptyList) {
  Region r(4096);
  KeyList kl = r.view(CodecId::kVByte);
  EXPECT_EQ(kl.block_count(), 0u);
  EXPECT_EQ(kl.key_count(), 0u);
  EXPECT_EQ(kl.used_bytes(), KeyList::kHeaderBytes);
  EXPECT_FALSE(kl.find(1).has_value());
  EXPECT_FALSE(kl.first_key().has_value());
  EXPECT_FALSE(kl.last_key().has_value());
  EXPECT_EQ(kl.locate_block(5), 0u);
  EXPECT_EQ(kl.erase(5).status, KlStatus::kNotFound);
  EXPECT_THROW(kl.select(0), ContractViolation);
}

TEST(KeyList, LocateBlock) {
  Region r(8192);
  KeyList kl = r.view(CodecId::kVByte);
  std::vector<CompressedBlock> blocks;
  for (Key s : {0u, 1000u, 2000u}) {
    const std::vector<Key> keys = range(s, s + 100);
    blocks.push_back(compress_block(CodecId::kVByte, keys, s));
  }
  ASSERT_TRUE(kl.build(blocks));
  EXPECT_EQ(kl.locate_block(1500), 1u);
  EXPECT_EQ(kl.locate_block(0), 0u);
  EXPECT_EQ(kl.locate_block(999), 0u);
  EXPECT_EQ(kl.locate_block(5000), 2u);

  Region r2(8192);
  KeyList k2 = r2.view(CodecId::kVByte);
  const std::vector<Key> high = range(50, 60);
  const CompressedBlock hb = compress_block(CodecId::kVByte, high, 50);
  ASSERT_TRUE(k2.build(std::span<const CompressedBlock>(&hb, 1)));
  EXPECT_EQ(k2.locate_block(3), 0u);
}

TEST(KeyList, LocateBlockAgreesWithDecodedScan) {
  std::mt19937_64 rng(31);
  Region r(16384);
  KeyList kl = r.view(CodecId::kVarIntGB);
  for (int i = 0; i < 3000; ++i) kl.insert(static_cast<Key>(rng() % 100000));
  std::vector<std::pair<Key, Key>> ranges;
  kl.for_each_block([&](const BlockInfo&, std::span<const Key> keys) {
    ranges.emplace_back(keys.front(), keys.back());
  });
  for (int q = 0; q < 2000; ++q) {
    const Key k = static_cast<Key>(rng() % 110000);
    uint32_t expect = 0;
    for (uint32_t b = 0; b < ranges.size(); ++b) {
      if (ranges[b].first <= k) expect = b;
    }
    const uint32_t got = kl.locate_block(k);
    // No gaps here, so descriptor index equals the non-empty block index.
    ASSERT_EQ(got, expect) << k;
    if (k >= ranges[got].first && k <= ranges[got].second) continue;
    if (got + 1 < ranges.size()) {
      ASSERT_LT(k, ranges[got + 1].first);
    }
  }
}

TEST(KeyList, MonotoneAppendsFillBlocks) {
  Region r(16384);
  KeyList kl = r.view(CodecId::kVByte);
  for (Key k = 0; k < 1000; ++k) {
    const KlResult res = kl.insert(3 * k);
    ASSERT_EQ(res.status, KlStatus::kOk);
    ASSERT_EQ(res.slot, k);
  }
  ASSERT_EQ(kl.block_count(), 4u);
  for (uint32_t b = 0; b < 3; ++b) EXPECT_EQ(kl.descriptor(b).n, 256u);
  EXPECT_EQ(kl.descriptor(3).n, 1000u - 768u);
  kl.check();
}

TEST(KeyList, InsertIntoFullBlockSplitsIt) {
  Region r(8192);
  KeyList kl = r.view(CodecId::kVByte);
  for (Key k = 0; k < 256; ++k) kl.insert(2 * k);
  ASSERT_EQ(kl.block_count(), 1u);
  const KlResult res = kl.insert(101);
  ASSERT_EQ(res.status, KlStatus::kOk);
  EXPECT_EQ(res.slot, 51u);
  ASSERT_EQ(kl.block_count(), 2u);
  EXPECT_EQ(kl.descriptor(0).n + kl.descriptor(1).n, 257u);
  EXPECT_LE(kl.descriptor(0).n, 256u);
  EXPECT_LE(kl.descriptor(1).n, 256u);
  std::vector<Key> expect;
  for (Key k = 0; k < 256; ++k) expect.push_back(2 * k);
  expect.insert(std::lower_bound(expect.begin(), expect.end(), 101u), 101u);
  EXPECT_EQ(kl.decode_all(), expect);
}

TEST(KeyList, DuplicateAndAbsentKeys) {
  Region r(4096);
  KeyList kl = r.view(CodecId::kFor);
  kl.insert(10);
  kl.insert(20);
  const std::vector<uint8_t> before = r.bytes;
  const KlResult dup = kl.insert(20);
  EXPECT_EQ(dup.status, KlStatus::kAlreadyExists);
  EXPECT_EQ(dup.slot, 1u);
  EXPECT_EQ(kl.erase(15).status, KlStatus::kNotFound);
  EXPECT_EQ(kl.erase(99).status, KlStatus::kNotFound);
  EXPECT_EQ(r.bytes, before);
}

TEST(KeyList, DeleteLeavesGapThatVacuumizeRemoves) {
  Region r(8192);
  KeyList kl = r.view(CodecId::kVByte, 128);
  std::vector<CompressedBlock> blocks;
  for (Key s : {0u, 1000u, 2000u}) {
    const std::vector<Key> keys =
        s == 1000 ? std::vector<Key>{1000} : range(s, s + 128);
    blocks.push_back(compress_block(CodecId::kVByte, keys, s));
  }
  ASSERT_TRUE(kl.build(blocks));
  ASSERT_EQ(kl.erase(1000).status, KlStatus::kOk);
  EXPECT_EQ(kl.gap_count(), 1u);
  EXPECT_EQ(kl.block_count(), 3u);
  kl.check();
  const std::vector<Key> keys = kl.decode_all();
  EXPECT_EQ(kl.find(2000)->slot, 128u);
  const uint32_t reclaimed = kl.vacuumize();
  EXPECT_EQ(reclaimed, KeyList::kDescriptorBytes + 1);
  EXPECT_EQ(kl.gap_count(), 0u);
  EXPECT_EQ(kl.block_count(), 2u);
  EXPECT_EQ(kl.decode_all(), keys);
  kl.check();
}

TEST(KeyList, VacuumizeOnDenseByteCodecIsNoOp) {
  for (CodecId id : {CodecId::kVByte, CodecId::kVarIntGB,
                     CodecId::kMaskedVByte, CodecId::kUncompressed}) {
    Region r(16384);
    KeyList kl = r.view(id);
    for (Key k = 0; k < 700; ++k) kl.insert(5 * k + 1);
    const std::vector<uint8_t> before = r.bytes;
    EXPECT_EQ(kl.vacuumize(), 0u);
    EXPECT_EQ(r.bytes, before) << codec_name(id);
  }
}

TEST(KeyList, BitPackedNodeAtCapacityCannotDelete) {
  // Full b=1 blocks; capacity exactly what they use.
  std::vector<CompressedBlock> blocks;
  for (Key s = 0; s < 4 * 128; s += 128) {
    const std::vector<Key> keys = range(s + 1, s + 129);
    blocks.push_back(compress_block(CodecId::kBP128, keys, s));
    ASSERT_EQ(blocks.back().info.meta, 1u);
  }
  const uint32_t need = KeyList::bytes_needed(CodecId::kBP128, blocks);
  EXPECT_EQ(need, KeyList::kHeaderBytes + 4 * (16 + 16));
  Region r(need);
  KeyList kl = r.view(CodecId::kBP128);
  ASSERT_TRUE(kl.build(blocks));
  EXPECT_EQ(kl.free_bytes(), 0u);
  const std::vector<uint8_t> before = r.bytes;
  EXPECT_EQ(kl.erase(200).status, KlStatus::kNeedsSpace);
  EXPECT_EQ(kl.decode_all().size(), 512u);
  // The last block may grow into the free tail once there is one.
  Region roomy(need + 16);
  KeyList k2 = roomy.view(CodecId::kBP128);
  ASSERT_TRUE(k2.build(blocks));
  EXPECT_EQ(k2.erase(500).status, KlStatus::kOk);
  EXPECT_EQ(k2.info(3).meta, 2u);
}

TEST(KeyList, BuildRefusesOversizedLayout) {
  Region r(64);
  KeyList kl = r.view(CodecId::kUncompressed);
  const std::vector<Key> keys = range(0, 20);
  const CompressedBlock b = compress_block(CodecId::kUncompressed, keys, 0);
  const std::vector<uint8_t> before = r.bytes;
  EXPECT_FALSE(kl.build(std::span<const CompressedBlock>(&b, 1)));
  EXPECT_EQ(r.bytes, before);
}

TEST(KeyList, InsertReturnsNeedsSpaceWhenFull) {
  Region r(128);
  KeyList kl = r.view(CodecId::kUncompressed);
  Key k = 0;
  while (kl.insert(k).status == KlStatus::kOk) ++k;
  EXPECT_EQ(kl.key_count(), k);
  EXPECT_LE(kl.used_bytes(), kl.capacity());
  EXPECT_EQ(kl.decode_all(), range(0, k));
}

TEST(KeyList, SplitEqualBlocksTwoAndTwo) {
  Region r(16384);
  KeyList kl = r.view(CodecId::kUncompressed, 128);
  for (Key k = 0; k < 512; ++k) kl.insert(k);
  ASSERT_EQ(kl.block_count(), 4u);
  Region rr(16384);
  KeyList right = rr.view(CodecId::kUncompressed, 128);
  const Key pivot = kl_split(kl, right);
  EXPECT_EQ(pivot, 256u);
  EXPECT_EQ(kl.block_count(), 2u);
  EXPECT_EQ(right.block_count(), 2u);
  EXPECT_EQ(kl.decode_all(), range(0, 256));
  EXPECT_EQ(right.decode_all(), range(256, 512));
}

TEST(KeyList, SplitLoneBlockHalvesItFirst) {
  Region r(16384);
  KeyList kl = r.view(CodecId::kBP128);
  for (Key k = 0; k < 100; ++k) kl.insert(7 * k);
  ASSERT_EQ(kl.block_count(), 1u);
  Region rr(16384);
  KeyList right = rr.view(CodecId::kBP128);
  const Key pivot = kl_split(kl, right);
  EXPECT_GT(kl.key_count(), 0u);
  EXPECT_GT(right.key_count(), 0u);
  EXPECT_EQ(kl.key_count() + right.key_count(), 100u);
  EXPECT_EQ(pivot, *right.first_key());
  EXPECT_LT(*kl.last_key(), pivot);
}

TEST(KeyList, SplitRequiresTwoKeys) {
  Region r(1024), rr(1024);
  KeyList kl = r.view(CodecId::kVByte);
  KeyList right = rr.view(CodecId::kVByte);
  kl.insert(3);
  EXPECT_THROW(kl_split(kl, right), ContractViolation);
}

TEST(KeyList, CapacityCannotShrinkBelowUse) {
  Region r(1024);
  KeyList kl = r.view(CodecId::kUncompressed);
  for (Key k = 0; k < 10; ++k) kl.insert(k);
  EXPECT_THROW(kl.set_capacity(kl.used_bytes() - 1), ContractViolation);
  EXPECT_THROW(kl.set_capacity(2000), ContractViolation);
  kl.set_capacity(kl.used_bytes());
  EXPECT_EQ(kl.free_bytes(), 0u);
}

TEST(KeyList, CorruptDirectoryIsDetected) {
  Region r(1024);
  KeyList kl = r.view(CodecId::kVByte);
  for (Key k = 0; k < 10; ++k) kl.insert(10 * k);
  // Claim more keys than the payload holds.
  store_le16(r.bytes.data() + KeyList::kHeaderBytes + 2, 300);
  EXPECT_THROW(kl.check(), CorruptionError);
}

}  // namespace
}  // namespace packdb
