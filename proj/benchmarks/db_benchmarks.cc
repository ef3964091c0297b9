#include <benchmark/benchmark.h>

#include <numeric>

#include "packdb/bench.h"
#include "packdb/database.h"

namespace {

using namespace packdb;

constexpr uint64_t kKeys = 200'000;

const std::vector<Key>& dataset() {
  static const std::vector<Key> keys = bench::gen_clusterdata({kKeys, 1});
  return keys;
}

Database build(CodecId id) {
  StoreConfig config;
  config.codec = id;
  config.record_size = 0;
  Database db = Database::in_memory(config);
  for (Key k : dataset()) db.insert(k);
  return db;
}

void BM_Insert(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  for (auto _ : state) {
    Database db = build(id);
    benchmark::DoNotOptimize(db.size());
  }
  state.SetItemsProcessed(state.iterations() * kKeys);
  state.SetLabel(std::string(codec_name(id)));
}

void BM_Lookup(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  Database db = build(id);
  size_t i = 0;
  const auto& keys = dataset();
  for (auto _ : state) {
    benchmark::DoNotOptimize(db.find(keys[i]));
    i = (i + 7919) % keys.size();
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(codec_name(id)));
}

void BM_Sum(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  Database db = build(id);
  for (auto _ : state) benchmark::DoNotOptimize(db.sum_keys());
  state.SetItemsProcessed(state.iterations() * kKeys);
  state.SetLabel(std::string(codec_name(id)));
}

void BM_Cursor(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  Database db = build(id);
  for (auto _ : state) {
    uint64_t sum = 0;
    for (Cursor c = db.cursor_first(); c.valid(); c.next()) sum += c.key();
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * kKeys);
  state.SetLabel(std::string(codec_name(id)));
}

void all_codecs(benchmark::internal::Benchmark* b) {
  for (CodecId id : kAllCodecs) b->Arg(static_cast<int>(id));
}

BENCHMARK(BM_Insert)->Apply(all_codecs)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lookup)->Apply(all_codecs);
BENCHMARK(BM_Sum)->Apply(all_codecs)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Cursor)->Apply(all_codecs)->Unit(benchmark::kMicrosecond);

}  // namespace
