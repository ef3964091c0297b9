#include <chrono>
#include <numeric>
#include <string>

#include "packdb/bench.h"
#include "packdb/database.h"
#include "packdb/error.h"

namespace packdb::bench {

namespace {

struct WorkloadSpec {
  Workload w;
  std::string_view name;
};

constexpr WorkloadSpec kWorkloads[] = {
    {Workload::kInsert, "insert"},
    {Workload::kLookup, "lookup"},
    {Workload::kCursor, "cursor"},
    {Workload::kSum, "sum"},
    {Workload::kAvgFilter, "avg-filter"},
};

std::vector<Key> generate(const DbBenchSpec& spec) {
  if (spec.sequential) {
    std::vector<Key> keys(spec.n);
    std::iota(keys.begin(), keys.end(), Key{0});
    return keys;
  }
  return gen_clusterdata({spec.n, spec.seed});
}

StoreConfig config_for(CodecId id, const DbBenchSpec& spec) {
  StoreConfig c;
  c.codec = id;
  c.page_size = spec.page_size;
  c.block_size = spec.block_size;
  c.record_size = 0;
  return c;
}

Database build(CodecId id, const DbBenchSpec& spec,
               const std::vector<Key>& keys) {
  Database db = Database::in_memory(config_for(id, spec));
  for (Key k : keys) {
    if (db.insert(k) != OpStatus::kOk) {
      throw BenchFailure("insert of a fresh key reported a duplicate");
    }
  }
  return db;
}

void fail(CodecId id, Workload w, const std::string& what) {
  throw BenchFailure(std::string(codec_name(id)) + " " +
                     std::string(workload_name(w)) + ": " + what);
}

Key avg_threshold(const std::vector<Key>& keys) { return keys.back() / 2; }

// Checks the built database against the generator before anything is timed.
void verify(CodecId id, Workload w, Database& db,
            const std::vector<Key>& keys) {
  if (db.size() != keys.size()) fail(id, w, "key count mismatch");
  const uint64_t sum = std::accumulate(keys.begin(), keys.end(), uint64_t{0});
  if (db.sum_keys() != sum) fail(id, w, "sum mismatch");
  if (db.max_key() != keys.back()) fail(id, w, "max key mismatch");
  switch (w) {
    case Workload::kInsert:
    case Workload::kSum:
      break;
    case Workload::kLookup:
      for (Key k : keys) {
        if (!db.contains(k)) fail(id, w, "key " + std::to_string(k) + " lost");
      }
      break;
    case Workload::kCursor: {
      size_t i = 0;
      for (Cursor c = db.cursor_first(); c.valid(); c.next(), ++i) {
        if (i >= keys.size() || c.key() != keys[i]) {
          fail(id, w, "cursor order mismatch at " + std::to_string(i));
        }
      }
      if (i != keys.size()) fail(id, w, "cursor ended early");
      break;
    }
    case Workload::kAvgFilter: {
      const Key t = avg_threshold(keys);
      AverageResult want;
      for (Key k : keys) {
        if (k > t) {
          want.sum += k;
          ++want.count;
        }
      }
      const AverageResult got = db.average_where_gt(t);
      if (got.sum != want.sum || got.count != want.count) {
        fail(id, w, "filtered average mismatch");
      }
      break;
    }
  }
}

SizeReport size_of(Database& db, uint64_t n) {
  const DbStats s = db.stats();
  return {static_cast<double>(s.tree.keylist_bytes) / n,
          static_cast<double>(s.file_bytes) / n};
}

}  // namespace

std::string_view workload_name(Workload w) {
  for (const auto& s : kWorkloads) {
    if (s.w == w) return s.name;
  }
  return "unknown";
}

std::optional<Workload> parse_workload(std::string_view name) {
  for (const auto& s : kWorkloads) {
    if (s.name == name) return s.w;
  }
  return std::nullopt;
}

SizeReport measure_size(CodecId id, const DbBenchSpec& spec) {
  const std::vector<Key> keys = generate(spec);
  Database db = build(id, spec, keys);
  return size_of(db, keys.size());
}

std::vector<BenchReport> run_dbbench(CodecId id, const DbBenchSpec& spec,
                                     Workload w, int runs) {
  if (runs < 1) contract_violation("dbbench: runs must be positive");
  if (spec.n == 0) contract_violation("dbbench: n must be positive");
  using clock = std::chrono::steady_clock;
  const std::vector<Key> keys = generate(spec);
  const uint32_t block_size =
      block_limits(id, spec.block_size).max_keys;

  std::optional<Database> shared;
  if (w != Workload::kInsert) {
    shared.emplace(build(id, spec, keys));
    verify(id, w, *shared, keys);
  }

  std::vector<BenchReport> reports;
  for (int run = 0; run < runs; ++run) {
    uint64_t sink = 0;
    clock::time_point t0, t1;
    std::optional<Database> built;
    Database* db = shared ? &*shared : nullptr;
    switch (w) {
      case Workload::kInsert:
        t0 = clock::now();
        built.emplace(build(id, spec, keys));
        t1 = clock::now();
        db = &*built;
        verify(id, w, *db, keys);
        break;
      case Workload::kLookup:
        t0 = clock::now();
        for (Key k : keys) sink += db->contains(k);
        t1 = clock::now();
        if (sink != keys.size()) fail(id, w, "lookup missed keys");
        break;
      case Workload::kCursor:
        t0 = clock::now();
        for (Cursor c = db->cursor_first(); c.valid(); c.next()) {
          sink += c.key();
        }
        t1 = clock::now();
        break;
      case Workload::kSum:
        t0 = clock::now();
        sink = db->sum_keys();
        t1 = clock::now();
        break;
      case Workload::kAvgFilter:
        t0 = clock::now();
        if (auto mx = db->max_key()) {
          sink = db->average_where_gt(*mx / 2).count;
        }
        t1 = clock::now();
        break;
    }
    const SizeReport size = size_of(*db, keys.size());
    BenchReport r;
    r.benchmark = "db-" + std::string(workload_name(w));
    r.codec = std::string(codec_name(id));
    r.n = keys.size();
    r.block_size = block_size;
    r.run = run;
    r.wall_ns = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    r.ops_per_sec = r.wall_ns == 0 ? 0 : keys.size() * 1e9 / r.wall_ns;
    r.bytes_per_key = size.bytes_per_key;
    r.file_bytes_per_key = size.file_bytes_per_key;
    reports.push_back(r);
    if (sink == 0xFFFFFFFFFFFFFFFFull) fail(id, w, "unreachable");
  }
  reports.push_back(median_of(reports));
  return reports;
}

}  // namespace packdb::bench
