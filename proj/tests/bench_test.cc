#include "packdb/bench.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "packdb/database.h"
#include "packdb/error.h"

namespace packdb::bench {
namespace {

TEST(ClusterData, PigeonholeTight) {
  const std::vector<Key> keys = gen_clusterdata({8, 3});
  ASSERT_EQ(keys.size(), 8u);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(std::set<Key>(keys.begin(), keys.end()).size(), 8u);
  EXPECT_LT(keys.back(), 9u);
}

TEST(ClusterData, Deterministic) {
  EXPECT_EQ(gen_clusterdata({5000, 17}), gen_clusterdata({5000, 17}));
  EXPECT_NE(gen_clusterdata({5000, 17}), gen_clusterdata({5000, 18}));
}

TEST(ClusterData, MillionKeysDistinctAndBounded) {
  const uint64_t n = 1'000'000;
  const std::vector<Key> keys = gen_clusterdata({n, 1});
  ASSERT_EQ(keys.size(), n);
  for (size_t i = 1; i < keys.size(); ++i) ASSERT_LT(keys[i - 1], keys[i]);
  EXPECT_LT(keys.back(), clusterdata_range(n));
}

TEST(ClusterData, SmallSizes) {
  for (uint64_t n = 1; n < 300; ++n) {
    const std::vector<Key> keys = gen_clusterdata({n, n});
    ASSERT_EQ(keys.size(), n);
    ASSERT_EQ(std::set<Key>(keys.begin(), keys.end()).size(), n);
    ASSERT_LT(keys.back(), std::max<uint64_t>(1, clusterdata_range(n)));
  }
  EXPECT_THROW(gen_clusterdata({0, 1}), ContractViolation);
}

TEST(Uniform, StaysInRange) {
  Rng rng(1);
  for (uint64_t bound : {1ull, 2ull, 3ull, 1000ull, (1ull << 40) + 7}) {
    for (int i = 0; i < 1000; ++i) ASSERT_LT(uniform(rng, bound), bound);
  }
}

TEST(Micro, SelectIndexesAreUniform) {
  Rng rng(2);
  const uint32_t len = 256;
  const uint32_t draws = 256 * 400;
  std::vector<uint32_t> counts(len);
  for (uint32_t i : select_indexes(rng, len, draws)) ++counts[i];
  const double expect = static_cast<double>(draws) / len;
  double chi2 = 0;
  for (uint32_t c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 255 degrees of freedom; the 0.999 quantile is about 330.
  EXPECT_LT(chi2, 330.0);
}

TEST(Micro, ConstantBlocksDecodeForEveryCodec) {
  MicroSpec spec;
  spec.b = 0;
  spec.blocks = 8;
  for (CodecId id : kAllCodecs) {
    EXPECT_NO_THROW(run_micro(id, spec, MicroOp::kDecompress, 1))
        << codec_name(id);
  }
}

TEST(Micro, BP128SizeAccounting) {
  for (uint32_t b : {1u, 4u, 8u, 13u, 24u}) {
    MicroSpec spec;
    spec.b = b;
    spec.blocks = 16;
    const auto r = run_micro(CodecId::kBP128, spec, MicroOp::kDecompress, 1);
    // b bits per key plus one 16-byte descriptor per 128 keys.
    EXPECT_DOUBLE_EQ(r.front().bytes_per_key * 8, b + 1.0) << b;
  }
}

TEST(Micro, EveryOpRunsAndReportsMedian) {
  MicroSpec spec;
  spec.blocks = 4;
  for (MicroOp op : {MicroOp::kDecompress, MicroOp::kSelect, MicroOp::kFind,
                     MicroOp::kInsertFromRandom}) {
    const auto reports = run_micro(CodecId::kVarIntGB, spec, op, 3);
    ASSERT_EQ(reports.size(), 4u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(reports[i].run, i);
    EXPECT_EQ(reports.back().run, kMedianRun);
    EXPECT_EQ(parse_micro_op(micro_op_name(op)), op);
  }
}

TEST(Micro, RejectsBadSpec) {
  MicroSpec spec;
  spec.b = 25;
  EXPECT_THROW(run_micro(CodecId::kVByte, spec, MicroOp::kSelect, 1),
               ContractViolation);
}

TEST(DbBench, SumMatchesGenerator) {
  DbBenchSpec spec;
  spec.n = 50000;
  const std::vector<Key> keys = gen_clusterdata({spec.n, spec.seed});
  const uint64_t expect = std::accumulate(keys.begin(), keys.end(), uint64_t{0});
  Database db = Database::in_memory();
  for (Key k : keys) db.insert(k);
  EXPECT_EQ(db.sum_keys(), expect);
  for (Workload w : {Workload::kInsert, Workload::kLookup, Workload::kCursor,
                     Workload::kSum, Workload::kAvgFilter}) {
    const auto r = run_dbbench(CodecId::kVByte, spec, w, 1);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_GT(r.front().bytes_per_key, 0.5);
    EXPECT_EQ(parse_workload(workload_name(w)), w);
  }
}

TEST(DbBench, UncompressedCostsAboutFourBytesPerKey) {
  DbBenchSpec spec;
  spec.n = 200000;
  const SizeReport s = measure_size(CodecId::kUncompressed, spec);
  EXPECT_NEAR(s.bytes_per_key, 4.0, 0.2);
  EXPECT_GE(s.file_bytes_per_key, s.bytes_per_key);
}

TEST(DbBench, DeterministicNonTimingFields) {
  DbBenchSpec spec;
  spec.n = 30000;
  const auto a = run_dbbench(CodecId::kFor, spec, Workload::kSum, 2);
  const auto b = run_dbbench(CodecId::kFor, spec, Workload::kSum, 2);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].benchmark, b[i].benchmark);
    EXPECT_EQ(a[i].codec, b[i].codec);
    EXPECT_EQ(a[i].n, b[i].n);
    EXPECT_EQ(a[i].block_size, b[i].block_size);
    EXPECT_EQ(a[i].run, b[i].run);
    EXPECT_EQ(a[i].bytes_per_key, b[i].bytes_per_key);
  }
}

TEST(Csv, HeaderFirstAndRoundTrip) {
  MicroSpec spec;
  spec.blocks = 4;
  const auto reports = run_micro(CodecId::kSimdFor, spec, MicroOp::kFind, 3);
  std::stringstream ss;
  write_csv(ss, reports);
  std::string first;
  std::getline(ss, first);
  EXPECT_EQ(first, kCsvHeader);
  ss.seekg(0);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back.back().run, kMedianRun);
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].benchmark, reports[i].benchmark);
    EXPECT_EQ(back[i].codec, reports[i].codec);
    EXPECT_EQ(back[i].n, reports[i].n);
    EXPECT_EQ(back[i].block_size, reports[i].block_size);
    EXPECT_EQ(back[i].run, reports[i].run);
    EXPECT_EQ(back[i].wall_ns, reports[i].wall_ns);
    EXPECT_NEAR(back[i].ops_per_sec, reports[i].ops_per_sec,
                1e-6 * reports[i].ops_per_sec + 1e-9);
    EXPECT_NEAR(back[i].bytes_per_key, reports[i].bytes_per_key, 1e-9);
  }
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream missing("a,b,c\n");
  EXPECT_THROW(read_csv(missing), std::invalid_argument);
  std::stringstream short_row(std::string(kCsvHeader) + "\nx,vbyte,1\n");
  EXPECT_THROW(read_csv(short_row), std::invalid_argument);
}

TEST(Median, PicksMiddleWallTime) {
  std::vector<BenchReport> runs(3);
  runs[0].wall_ns = 30;
  runs[1].wall_ns = 10;
  runs[2].wall_ns = 20;
  for (int i = 0; i < 3; ++i) runs[i].run = i;
  const BenchReport m = median_of(runs);
  EXPECT_EQ(m.wall_ns, 20u);
  EXPECT_EQ(m.run, kMedianRun);
}

}  // namespace
}  // namespace packdb::bench

namespace packdb::bench {
namespace {

TEST(SpeedWarnings, FlagsOnlyViolatedMedians) {
  auto row = [](std::string bench, std::string codec, int run, double ops) {
    BenchReport r;
    r.benchmark = std::move(bench);
    r.codec = std::move(codec);
    r.run = run;
    r.ops_per_sec = ops;
    return r;
  };
  std::vector<BenchReport> reports = {
      row("micro-decompress-b8", "bp128", kMedianRun, 1.0),
      row("micro-decompress-b8", "vbyte", kMedianRun, 2.0),
      row("micro-decompress-b20", "bp128", kMedianRun, 1.0),
      row("micro-decompress-b20", "vbyte", kMedianRun, 2.0),
      row("micro-select-b8", "simdfor", 0, 1.0),
      row("micro-select-b8", "bp128", 0, 2.0),
      row("micro-select-b4", "simdfor", kMedianRun, 3.0),
      row("micro-select-b4", "bp128", kMedianRun, 2.0),
  };
  const auto w = speed_warnings(reports);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], "micro-decompress-b8: bp128 slower than vbyte");
}

}  // namespace
}  // namespace packdb::bench
