#include <benchmark/benchmark.h>

#include "packdb/bench.h"
#include "packdb/codec.h"

namespace {

using namespace packdb;

// One 256-key block of uniform deltas in [0, 2^b).
CompressedBlock make_block(CodecId id, uint32_t b, std::vector<Key>* keys) {
  bench::Rng rng(42);
  bench::MicroSpec spec;
  spec.b = b;
  *keys = bench::gen_micro_block(spec, rng);
  return compress_block(id, *keys, 0, 256);
}

void BM_Decompress(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  std::vector<Key> keys;
  const CompressedBlock block =
      make_block(id, static_cast<uint32_t>(state.range(1)), &keys);
  const Codec& c = codec(id);
  std::vector<Key> out(kDecodeBufferSize);
  for (auto _ : state) {
    c.decompress(block.info, block.payload, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * block.info.n);
  state.SetLabel(std::string(codec_name(id)));
}

void BM_Select(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  std::vector<Key> keys;
  const CompressedBlock block =
      make_block(id, static_cast<uint32_t>(state.range(1)), &keys);
  const Codec& c = codec(id);
  uint32_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.select(block.info, block.payload, i));
    i = (i * 97 + 31) & 255;
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(codec_name(id)));
}

void BM_LowerBound(benchmark::State& state) {
  const auto id = static_cast<CodecId>(state.range(0));
  std::vector<Key> keys;
  const CompressedBlock block =
      make_block(id, static_cast<uint32_t>(state.range(1)), &keys);
  const Codec& c = codec(id);
  uint32_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        c.lower_bound(block.info, block.payload, keys[i]));
    i = (i * 97 + 31) & 255;
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(codec_name(id)));
}

void codec_args(benchmark::internal::Benchmark* b) {
  for (CodecId id : kAllCodecs) {
    for (int bits : {1, 8, 16}) b->Args({static_cast<int>(id), bits});
  }
}

BENCHMARK(BM_Decompress)->Apply(codec_args);
BENCHMARK(BM_Select)->Apply(codec_args);
BENCHMARK(BM_LowerBound)->Apply(codec_args);

void BM_PrefixSum(benchmark::State& state) {
  std::vector<uint32_t> deltas(256, 3);
  std::vector<Key> out(256);
  const bool vector4 = state.range(0) != 0;
  for (auto _ : state) {
    if (vector4) {
      prefix_sum_vector4(deltas, 7, out);
    } else {
      prefix_sum(deltas, 7, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
  state.SetLabel(vector4 ? "vector4" : "scalar");
}
BENCHMARK(BM_PrefixSum)->Arg(0)->Arg(1);

}  // namespace
