#include <algorithm>
#include <chrono>
#include <string>

#include "packdb/bench.h"
#include "packdb/error.h"

namespace packdb::bench {

namespace {

struct OpSpec {
  MicroOp op;
  std::string_view name;
};

constexpr OpSpec kOps[] = {
    {MicroOp::kDecompress, "decompress"},
    {MicroOp::kSelect, "select"},
    {MicroOp::kFind, "find"},
    {MicroOp::kInsertFromRandom, "insert-from-random"},
};

struct Prepared {
  std::vector<std::vector<Key>> keys;
  std::vector<CompressedBlock> blocks;
  // Per block: select indexes and lower-bound targets.
  std::vector<std::vector<uint32_t>> indexes;
  std::vector<std::vector<Key>> targets;
  std::vector<std::vector<Key>> shuffled;
  uint64_t payload_bytes = 0;
};

void fail(CodecId id, const std::string& what) {
  throw BenchFailure(std::string(codec_name(id)) + ": " + what);
}

Prepared prepare(CodecId id, const MicroSpec& spec) {
  if (spec.b > 24) contract_violation("micro: b must be at most 24");
  if (spec.block_length == 0 || spec.block_length > kMaxBlockKeys) {
    contract_violation("micro: block length must be in [1, 256]");
  }
  Rng rng(spec.seed);
  Prepared p;
  for (uint32_t i = 0; i < spec.blocks; ++i) {
    std::vector<Key> keys = gen_micro_block(spec, rng);
    p.blocks.push_back(compress_block(id, keys, 0, spec.block_length));
    p.payload_bytes += p.blocks.back().payload.size();
    std::vector<uint32_t> idx =
        select_indexes(rng, spec.block_length, spec.block_length);
    std::vector<Key> tgt(spec.block_length);
    for (uint32_t q = 0; q < spec.block_length; ++q) {
      tgt[q] = keys.front() +
               static_cast<Key>(uniform(rng, keys.back() - keys.front() + 1));
    }
    std::vector<Key> sh = keys;
    for (size_t k = sh.size(); k > 1; --k) {
      std::swap(sh[k - 1], sh[uniform(rng, k)]);
    }
    p.indexes.push_back(std::move(idx));
    p.targets.push_back(std::move(tgt));
    p.shuffled.push_back(std::move(sh));
    p.keys.push_back(std::move(keys));
  }
  return p;
}

CompressedBlock build_by_insertion(CodecId id, std::span<const Key> order) {
  CompressedBlock block;
  for (Key k : order) insert(id, block, k);
  return block;
}

void verify(CodecId id, const Prepared& p) {
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& keys = p.keys[b];
    if (decompress_block(id, p.blocks[b]) != keys) fail(id, "decode mismatch");
    for (uint32_t i : p.indexes[b]) {
      if (select(id, p.blocks[b], i) != keys[i]) fail(id, "select mismatch");
    }
    for (Key t : p.targets[b]) {
      const auto hit = find_lower_bound(id, p.blocks[b], t);
      const auto it = std::lower_bound(keys.begin(), keys.end(), t);
      if (!hit || hit->key != *it ||
          hit->index != static_cast<uint32_t>(it - keys.begin())) {
        fail(id, "lower bound mismatch");
      }
    }
    std::vector<Key> unique = keys;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (decompress_block(id, build_by_insertion(id, p.shuffled[b])) !=
        unique) {
      fail(id, "insert-from-random mismatch");
    }
  }
}

}  // namespace

std::string_view micro_op_name(MicroOp op) {
  for (const auto& o : kOps) {
    if (o.op == op) return o.name;
  }
  return "unknown";
}

std::optional<MicroOp> parse_micro_op(std::string_view name) {
  for (const auto& o : kOps) {
    if (o.name == name) return o.op;
  }
  return std::nullopt;
}

std::vector<uint32_t> select_indexes(Rng& rng, uint32_t block_length,
                                     uint32_t count) {
  std::vector<uint32_t> out(count);
  for (auto& i : out) i = static_cast<uint32_t>(uniform(rng, block_length));
  return out;
}

std::vector<Key> gen_micro_block(const MicroSpec& spec, Rng& rng) {
  std::vector<Key> keys(spec.block_length);
  Key acc = 0;
  for (auto& k : keys) {
    acc += static_cast<Key>(uniform(rng, uint64_t{1} << spec.b));
    k = acc;
  }
  return keys;
}

std::vector<BenchReport> run_micro(CodecId id, const MicroSpec& spec,
                                   MicroOp op, int runs) {
  if (runs < 1) contract_violation("micro: runs must be positive");
  const Prepared p = prepare(id, spec);
  verify(id, p);
  const Codec& c = codec(id);

  const uint32_t reps = op == MicroOp::kDecompress        ? 64
                        : op == MicroOp::kInsertFromRandom ? 1
                                                           : 8;
  std::vector<Key> out(kDecodeBufferSize);
  std::vector<BenchReport> reports;
  for (int run = 0; run < runs; ++run) {
    uint64_t ops = 0;
    uint64_t sink = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (uint32_t r = 0; r < reps; ++r) {
      for (size_t b = 0; b < p.blocks.size(); ++b) {
        const CompressedBlock& blk = p.blocks[b];
        switch (op) {
          case MicroOp::kDecompress:
            c.decompress(blk.info, blk.payload, out);
            sink += out[blk.info.n - 1];
            ops += blk.info.n;
            break;
          case MicroOp::kSelect:
            for (uint32_t i : p.indexes[b]) {
              sink += c.select(blk.info, blk.payload, i);
            }
            ops += p.indexes[b].size();
            break;
          case MicroOp::kFind:
            for (Key t : p.targets[b]) {
              sink += c.lower_bound(blk.info, blk.payload, t)->index;
            }
            ops += p.targets[b].size();
            break;
          case MicroOp::kInsertFromRandom:
            sink += build_by_insertion(id, p.shuffled[b]).info.n;
            ops += p.shuffled[b].size();
            break;
        }
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (sink == 0x5eed5eed5eed5eedull) fail(id, "unreachable");
    BenchReport r;
    r.benchmark = "micro-" + std::string(micro_op_name(op)) + "-b" +
                  std::to_string(spec.b);
    r.codec = std::string(codec_name(id));
    r.n = ops;
    r.block_size = spec.block_length;
    r.run = run;
    r.wall_ns = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    r.ops_per_sec = r.wall_ns == 0 ? 0 : ops * 1e9 / r.wall_ns;
    // Payload plus the 16-byte descriptors a KeyList would spend on the
    // same keys at the codec's default block size.
    const uint64_t keys = uint64_t{spec.blocks} * spec.block_length;
    const uint32_t limit = block_limits(id).max_keys;
    const uint64_t descriptors =
        uint64_t{spec.blocks} * ((spec.block_length + limit - 1) / limit);
    r.bytes_per_key =
        static_cast<double>(p.payload_bytes + 16 * descriptors) / keys;
    r.file_bytes_per_key = r.bytes_per_key;
    reports.push_back(r);
  }
  reports.push_back(median_of(reports));
  return reports;
}

std::vector<std::string> speed_warnings(
    const std::vector<BenchReport>& reports) {
  std::vector<std::string> out;
  auto median = [&](const std::string& bench,
                    const std::string& codec) -> const BenchReport* {
    for (const auto& r : reports) {
      if (r.run == kMedianRun && r.benchmark == bench && r.codec == codec) {
        return &r;
      }
    }
    return nullptr;
  };
  auto expect_faster = [&](const std::string& bench, const std::string& fast,
                           const std::string& slow) {
    const BenchReport* f = median(bench, fast);
    const BenchReport* s = median(bench, slow);
    if (f && s && f->ops_per_sec < s->ops_per_sec) {
      out.push_back(bench + ": " + fast + " slower than " + slow);
    }
  };
  for (uint32_t b = 1; b <= 16; ++b) {
    expect_faster("micro-decompress-b" + std::to_string(b), "bp128", "vbyte");
  }
  for (uint32_t b = 0; b <= 32; ++b) {
    expect_faster("micro-select-b" + std::to_string(b), "simdfor", "bp128");
  }
  return out;
}

}  // namespace packdb::bench
