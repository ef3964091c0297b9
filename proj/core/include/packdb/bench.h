#pragma once

// Benchmark harness: data generators, codec microbenchmarks, database
// workloads and CSV reporting. Every run verifies its results against the
// generator's ground truth before timing and throws BenchFailure on a
// mismatch.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "packdb/codec.h"

namespace packdb::bench {

class BenchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// Uniform integer in [0, bound), independent of the standard library's
// distribution implementation so outputs are identical everywhere.
uint64_t uniform(Rng& rng, uint64_t bound);

struct ClusterDataSpec {
  uint64_t n = 0;
  uint64_t seed = 1;
};

// n distinct ascending keys in [0, floor(9n/8)). The range is cut into
// ceil(n/1024) intervals at random points; each interval receives a share
// of n proportional to its width and its keys are sampled without
// replacement.
std::vector<Key> gen_clusterdata(const ClusterDataSpec& spec);

inline uint64_t clusterdata_range(uint64_t n) { return 9 * n / 8; }

struct MicroSpec {
  uint32_t b = 8;  // deltas are uniform in [0, 2^b), b <= 24
  uint32_t block_length = 256;
  uint64_t seed = 1;
  uint32_t blocks = 256;  // distinct blocks per run
};

// Prefix sums of uniform deltas; consecutive keys may be equal.
std::vector<Key> gen_micro_block(const MicroSpec& spec, Rng& rng);

// `count` indexes drawn uniformly from [0, block_length).
std::vector<uint32_t> select_indexes(Rng& rng, uint32_t block_length,
                                     uint32_t count);

enum class MicroOp : uint8_t { kDecompress, kSelect, kFind, kInsertFromRandom };
enum class Workload : uint8_t { kInsert, kLookup, kCursor, kSum, kAvgFilter };

std::string_view micro_op_name(MicroOp op);
std::optional<MicroOp> parse_micro_op(std::string_view name);
std::string_view workload_name(Workload w);
std::optional<Workload> parse_workload(std::string_view name);

inline constexpr int kMedianRun = -1;

struct BenchReport {
  std::string benchmark;
  std::string codec;
  uint64_t n = 0;  // integers processed per run
  uint32_t block_size = 0;
  int run = 0;  // kMedianRun for the median row
  uint64_t wall_ns = 0;
  double ops_per_sec = 0;
  double bytes_per_key = 0;
  double file_bytes_per_key = 0;  // not part of the CSV schema
};

// One report per run, followed by the median row.
std::vector<BenchReport> run_micro(CodecId codec, const MicroSpec& spec,
                                   MicroOp op, int runs = 3);

// Directional speed checks over median micro rows: BP128 decompress should
// not trail VByte for b in [1, 16], and SIMDFOR select should not trail
// BP128. Returns one message per violated expectation; timings are noisy,
// so callers report these rather than fail.
std::vector<std::string> speed_warnings(const std::vector<BenchReport>& reports);

struct DbBenchSpec {
  uint64_t n = 1'000'000;
  uint64_t seed = 1;
  uint32_t block_size = 0;  // 0: codec default
  uint32_t page_size = 16384;
  bool sequential = false;  // keys 0..n-1 instead of ClusterData
};

struct SizeReport {
  double bytes_per_key = 0;       // leaf KeyList bytes / n
  double file_bytes_per_key = 0;  // page count * page size / n
};

std::vector<BenchReport> run_dbbench(CodecId codec, const DbBenchSpec& spec,
                                     Workload workload, int runs = 3);
// Builds the database once and reports its size.
SizeReport measure_size(CodecId codec, const DbBenchSpec& spec);

// Median by wall time; non-timing fields come from the runs.
BenchReport median_of(const std::vector<BenchReport>& runs);

inline constexpr std::string_view kCsvHeader =
    "benchmark,codec,n,block_size,run,wall_ns,ops_per_sec,bytes_per_key";

void write_csv(std::ostream& out, const std::vector<BenchReport>& reports,
               bool header = true);
// Parses what write_csv emits. Throws std::invalid_argument on bad input.
std::vector<BenchReport> read_csv(std::istream& in);

}  // namespace packdb::bench
