#include "packdb/btree.h"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "packdb/database.h"
#include "packdb/error.h"
#include "test_util.h"
#include "tree_checks.h"

namespace packdb {
namespace {

StoreConfig small_config(CodecId id, uint32_t record_size = 8) {
  StoreConfig c;
  c.page_size = 4096;
  c.codec = id;
  c.record_size = record_size;
  c.max_separators = 5;
  return c;
}

// Smallest key below `id`, checking that every separator equals the
// smallest key of its right subtree. Returns nullopt for empty subtrees.
std::optional<Key> exact_separators(Pager& p, PageId id, bool* ok) {
  const uint8_t* page = p.read(id);
  if (is_leaf(page)) {
    return LeafNode(const_cast<uint8_t*>(page), p.config()).keys().first_key();
  }
  InternalNode n(const_cast<uint8_t*>(page), p.config());
  std::optional<Key> first;
  for (uint32_t i = 0; i <= n.count(); ++i) {
    const auto m = exact_separators(p, n.child(i), ok);
    if (i > 0 && m != n.key(i - 1)) *ok = false;
    if (!first) first = m;
  }
  return first;
}

TEST(BTree, InsertIntoEmptyTree) {
  Database db = Database::in_memory(small_config(CodecId::kVByte));
  EXPECT_EQ(db.size(), 0u);
  EXPECT_EQ(db.insert(42, 7), OpStatus::kOk);
  EXPECT_EQ(db.find(42), std::optional<uint64_t>(7));
  EXPECT_EQ(db.insert(42, 8), OpStatus::kAlreadyExists);
  EXPECT_EQ(db.find(42), std::optional<uint64_t>(7));
  EXPECT_EQ(db.stats().tree.height, 1u);
  db.check_invariants();
}

TEST(BTree, AbsentKeyBetweenPresentKeys) {
  Database db = Database::in_memory(small_config(CodecId::kFor));
  db.insert(10);
  db.insert(30);
  EXPECT_FALSE(db.find(20).has_value());
  EXPECT_FALSE(db.contains(0));
  EXPECT_TRUE(db.contains(30));
  EXPECT_EQ(db.erase(20), OpStatus::kNotFound);
}

class TreeTest : public ::testing::TestWithParam<CodecId> {};

TEST_P(TreeTest, SequentialInsertsKeepOrderAndSeparators) {
  Database db = Database::in_memory(small_config(GetParam()));
  std::map<Key, uint64_t> oracle;
  for (Key k = 0; k < 30000; ++k) {
    ASSERT_EQ(db.insert(3 * k + 1, k), OpStatus::kOk);
    oracle[3 * k + 1] = k;
  }
  EXPECT_EQ(testing::compare_with_oracle(db, oracle), "");
  for (const auto& [k, v] : oracle) ASSERT_EQ(db.find(k), v);
  db.check_invariants();
  EXPECT_GE(db.stats().tree.height, 3u);
  bool ok = true;
  exact_separators(db.pager(), db.pager().header().root, &ok);
  EXPECT_TRUE(ok);
}

TEST_P(TreeTest, RandomInsertsKeepExactSeparators) {
  Database db = Database::in_memory(small_config(GetParam()));
  std::mt19937_64 rng(41);
  for (int i = 0; i < 20000; ++i) db.insert(static_cast<Key>(rng() % 200000));
  db.check_invariants();
  bool ok = true;
  exact_separators(db.pager(), db.pager().header().root, &ok);
  EXPECT_TRUE(ok);
}

TEST_P(TreeTest, FuzzAgainstOracle) {
  Database db = Database::in_memory(small_config(GetParam()));
  db.tree().set_tracing(true);
  std::map<Key, uint64_t> oracle;
  std::mt19937_64 rng(42 + static_cast<int>(GetParam()));
  for (int op = 0; op < 40000; ++op) {
    // Drift between insert-heavy and erase-heavy phases.
    const bool grow = (op / 5000) % 2 == 0;
    const Key k = static_cast<Key>(rng() % 20000);
    const uint64_t r = rng();
    if (rng() % 100 < (grow ? 65u : 30u)) {
      const bool fresh = !oracle.count(k);
      ASSERT_EQ(db.insert(k, r),
                fresh ? OpStatus::kOk : OpStatus::kAlreadyExists);
      if (fresh) oracle[k] = r;
    } else {
      const bool present = oracle.erase(k) > 0;
      ASSERT_EQ(db.erase(k), present ? OpStatus::kOk : OpStatus::kNotFound);
    }
    ASSERT_EQ(testing::check_local_balancing(db.tree().last_trace()), "")
        << "op " << op;
    if (op % 4000 == 0) {
      ASSERT_EQ(testing::compare_with_oracle(db, oracle), "");
      db.check_invariants();
    }
  }
  ASSERT_EQ(testing::compare_with_oracle(db, oracle), "");
  db.check_invariants();
}

TEST_P(TreeTest, EraseEverything) {
  Database db = Database::in_memory(small_config(GetParam()));
  std::vector<Key> keys;
  for (Key k = 0; k < 20000; ++k) keys.push_back(k * 5);
  std::mt19937_64 rng(43);
  std::shuffle(keys.begin(), keys.end(), rng);
  for (Key k : keys) db.insert(k, k);
  std::shuffle(keys.begin(), keys.end(), rng);
  for (Key k : keys) ASSERT_EQ(db.erase(k), OpStatus::kOk);
  EXPECT_EQ(db.size(), 0u);
  for (Key k : keys) ASSERT_FALSE(db.find(k).has_value());
  EXPECT_FALSE(db.cursor_first().valid());
  EXPECT_EQ(db.sum_keys(), 0u);
  db.check_invariants();
  const DbStats s = db.stats();
  EXPECT_LE(s.tree.live_pages, 3u);
  EXPECT_EQ(s.tree.live_pages + s.free_pages + 1, s.page_count);
}

INSTANTIATE_TEST_SUITE_P(AllCodecs, TreeTest, ::testing::ValuesIn(kAllCodecs),
                         [](const auto& info) {
                           return testing::codec_param_name(info.param);
                         });

TEST(BTree, LeafSplitAddsOneSeparatorAndSparesGrandparent) {
  Database db = Database::in_memory(small_config(CodecId::kVByte));
  db.tree().set_tracing(true);
  std::mt19937_64 rng(44);
  int checked = 0;
  for (int i = 0; i < 60000 && checked < 20; ++i) {
    const Key k = static_cast<Key>(rng() % 1000000);
    // Parent separator count before the operation.
    db.insert(k);
    const OpTrace& t = db.tree().last_trace();
    bool leaf_split = false;
    bool other = false;
    for (const auto& e : t.events) {
      if (e.kind == TraceEvent::Kind::kSplit && e.leaf) leaf_split = true;
      else other = true;
    }
    if (!leaf_split || other || t.path.size() < 3) continue;
    const PageId parent = t.path[t.path.size() - 2];
    const PageId grand = t.path[t.path.size() - 3];
    EXPECT_TRUE(t.dirtied.count(parent));
    EXPECT_FALSE(t.dirtied.count(grand));
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(BTree, LeafSplitGrowsParentByOne) {
  Database db = Database::in_memory(small_config(CodecId::kUncompressed));
  db.tree().set_tracing(true);
  Key k = 0;
  // Fill the root leaf until the first split creates a parent.
  while (db.stats().tree.height == 1) db.insert(k++ * 2);
  const PageId root = db.pager().header().root;
  auto count = [&] {
    return InternalNode(const_cast<uint8_t*>(db.pager().read(root)),
                        db.config()).count();
  };
  const uint32_t before = count();
  bool split = false;
  while (!split) {
    db.insert(k++ * 2);
    for (const auto& e : db.tree().last_trace().events) {
      split |= e.kind == TraceEvent::Kind::kSplit && e.leaf;
    }
  }
  EXPECT_EQ(count(), before + 1);
}

TEST(BTree, CursorTraversalAndInvalidation) {
  Database db = Database::in_memory(small_config(CodecId::kMaskedVByte));
  EXPECT_FALSE(db.cursor_first().valid());
  for (Key k = 0; k < 5000; ++k) db.insert(k * 2, k);
  ASSERT_GT(db.stats().tree.leaves, 1u);
  Cursor c = db.cursor_first();
  Key expect = 0;
  uint64_t visited = 0;
  for (; c.valid(); c.next(), ++visited, expect += 2) {
    ASSERT_EQ(c.key(), expect);
    ASSERT_EQ(c.record(), expect / 2);
  }
  EXPECT_EQ(visited, 5000u);
  EXPECT_FALSE(c.next());
  EXPECT_THROW(c.key(), ContractViolation);

  Cursor live = db.cursor_first();
  live.next();
  db.find(10);
  db.insert(4);  // already present: nothing changes
  db.erase(5);   // absent
  EXPECT_EQ(live.key(), 2u);
  db.insert(5);
  EXPECT_THROW(live.key(), CursorInvalidated);
  EXPECT_THROW(live.next(), CursorInvalidated);
}

TEST(BTree, CursorLowerBound) {
  Database db = Database::in_memory(small_config(CodecId::kBP128));
  std::set<Key> oracle;
  std::mt19937_64 rng(45);
  for (int i = 0; i < 8000; ++i) {
    const Key k = static_cast<Key>(rng() % 50000);
    db.insert(k);
    oracle.insert(k);
  }
  for (int q = 0; q < 3000; ++q) {
    const Key t = static_cast<Key>(rng() % 51000);
    Cursor c = db.cursor_lower_bound(t);
    auto it = oracle.lower_bound(t);
    for (int step = 0; step < 5; ++step, ++it, c.next()) {
      if (it == oracle.end()) {
        ASSERT_FALSE(c.valid());
        break;
      }
      ASSERT_TRUE(c.valid());
      ASSERT_EQ(c.key(), *it);
    }
  }
}

TEST(BTree, Analytics) {
  Database db = Database::in_memory(small_config(CodecId::kVByte, 0));
  EXPECT_EQ(db.sum_keys(), 0u);
  EXPECT_FALSE(db.max_key().has_value());
  EXPECT_EQ(db.average_where_gt(0).count, 0u);
  for (Key k = 1; k <= 10; ++k) db.insert(k);
  const AverageResult a = db.average_where_gt(5);
  EXPECT_EQ(a.count, 5u);
  EXPECT_EQ(a.sum, 40u);
  EXPECT_EQ(a.mean(), 8.0);
  EXPECT_EQ(db.average_where_gt(10).count, 0u);
  EXPECT_FALSE(db.average_where_gt(10).mean().has_value());
  EXPECT_EQ(db.average_where_gt(0xFFFFFFFFu).count, 0u);
  EXPECT_EQ(db.max_key(), 10u);
  EXPECT_EQ(db.sum_keys(), 55u);
}

TEST(BTree, AnalyticsMatchBruteForce) {
  for (CodecId id : kAllCodecs) {
    Database db = Database::in_memory(small_config(id, 0));
    std::mt19937_64 rng(46);
    std::set<Key> keys;
    for (int i = 0; i < 20000; ++i) {
      const Key k = static_cast<Key>(rng() % 0xFFFFFFF0u);
      db.insert(k);
      keys.insert(k);
      if (i % 3 == 0) {
        const Key e = static_cast<Key>(rng() % 0xFFFFFFF0u);
        db.erase(e);
        keys.erase(e);
      }
    }
    uint64_t total = 0;
    for (Key k : keys) total += k;
    ASSERT_EQ(db.sum_keys(), total);
    ASSERT_EQ(db.max_key(), *keys.rbegin());
    for (int q = 0; q < 50; ++q) {
      const Key t = q == 0 ? *keys.rbegin() / 2 : static_cast<Key>(rng());
      uint64_t sum = 0, count = 0;
      for (auto it = keys.upper_bound(t); it != keys.end(); ++it) {
        sum += *it;
        ++count;
      }
      const AverageResult a = db.average_where_gt(t);
      ASSERT_EQ(a.count, count) << codec_name(id);
      ASSERT_EQ(a.sum, sum);
    }
  }
}

TEST(BTree, SplitOnDelete) {
  StoreConfig c = small_config(CodecId::kBP128, 0);
  c.max_separators = 0;
  Database db = Database::in_memory(c);
  std::map<Key, uint64_t> oracle;
  for (Key k = 0; k < 200000; ++k) {
    db.insert(k);
    oracle[k] = 0;
  }
  db.tree().set_tracing(true);
  const uint64_t pages_before = db.stats().tree.live_pages;
  int erase_splits = 0;
  std::mt19937_64 rng(47);
  for (int i = 0; i < 20000 && erase_splits == 0; ++i) {
    const Key k = static_cast<Key>(1 + rng() % 199998);
    db.erase(k);
    oracle.erase(k);
    for (const auto& e : db.tree().last_trace().events) {
      if (e.kind == TraceEvent::Kind::kSplit && e.during_erase) ++erase_splits;
    }
    ASSERT_EQ(testing::check_local_balancing(db.tree().last_trace()), "");
  }
  EXPECT_GT(erase_splits, 0);
  EXPECT_GT(db.stats().tree.live_pages, pages_before);
  EXPECT_EQ(testing::compare_with_oracle(db, oracle), "");
  db.check_invariants();
}

TEST(BTree, EmptyLeavesStayRare) {
  Database db = Database::in_memory(small_config(CodecId::kVarIntGB));
  std::mt19937_64 rng(48);
  std::vector<Key> live;
  for (int round = 0; round < 6; ++round) {
    for (int i = 0; i < 15000; ++i) {
      const Key k = static_cast<Key>(rng() % 1000000);
      if (db.insert(k) == OpStatus::kOk) live.push_back(k);
    }
    std::shuffle(live.begin(), live.end(), rng);
    const size_t keep = live.size() / 4;
    for (size_t i = keep; i < live.size(); ++i) db.erase(live[i]);
    live.resize(keep);
    const TreeStats s = db.stats().tree;
    ASSERT_LT(static_cast<double>(s.empty_leaves), 0.05 * s.live_pages + 1);
    db.check_invariants();
  }
}

TEST(BTree, SurvivesReopen) {
  testing::TempDir dir;
  std::map<Key, uint64_t> oracle;
  std::mt19937_64 rng(49);
  {
    Database db = Database::create(dir.file("t.db"),
                                   small_config(CodecId::kSimdFor));
    for (int i = 0; i < 30000; ++i) {
      const Key k = static_cast<Key>(rng() % 40000);
      if (rng() % 3 == 0) {
        db.erase(k);
        oracle.erase(k);
      } else if (db.insert(k, i) == OpStatus::kOk) {
        oracle[k] = static_cast<uint64_t>(i);
      }
    }
    db.close();
  }
  Database db = Database::open(dir.file("t.db"));
  EXPECT_EQ(db.config().codec, CodecId::kSimdFor);
  EXPECT_EQ(testing::compare_with_oracle(db, oracle), "");
  db.check_invariants();
  const DbStats s = db.stats();
  EXPECT_EQ(s.tree.live_pages + s.free_pages + 1, s.page_count);
}

TEST(BTree, StorageLimitRaisesResourceError) {
  Database db = Database::in_memory(small_config(CodecId::kUncompressed));
  db.pager().set_page_limit(4);
  EXPECT_THROW(
      {
        for (Key k = 0; k < 100000; ++k) db.insert(k);
      },
      ResourceError);
}

}  // namespace
}  // namespace packdb
