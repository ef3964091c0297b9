#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "packdb/bench.h"
#include "packdb/error.h"

namespace packdb::bench {

BenchReport median_of(const std::vector<BenchReport>& runs) {
  if (runs.empty()) contract_violation("median_of: no runs");
  std::vector<BenchReport> sorted = runs;
  std::sort(sorted.begin(), sorted.end(),
            [](const BenchReport& a, const BenchReport& b) {
              return a.wall_ns < b.wall_ns;
            });
  BenchReport m = sorted[sorted.size() / 2];
  m.run = kMedianRun;
  return m;
}

void write_csv(std::ostream& out, const std::vector<BenchReport>& reports,
               bool header) {
  if (header) out << kCsvHeader << '\n';
  char buf[64];
  for (const BenchReport& r : reports) {
    out << r.benchmark << ',' << r.codec << ',' << r.n << ',' << r.block_size
        << ',';
    if (r.run == kMedianRun) {
      out << "median";
    } else {
      out << r.run;
    }
    out << ',' << r.wall_ns << ',';
    std::snprintf(buf, sizeof(buf), "%.1f", r.ops_per_sec);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", r.bytes_per_key);
    out << buf << '\n';
  }
  if (!out) throw IoError("failed to write CSV output");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_int(const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("bad integer field: " + s);
  }
  return v;
}

double parse_double(const std::string& s) {
  size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

}  // namespace

std::vector<BenchReport> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("missing CSV header");
  }
  std::vector<BenchReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw std::invalid_argument("bad CSV row: " + line);
    BenchReport r;
    r.benchmark = f[0];
    r.codec = f[1];
    r.n = parse_int<uint64_t>(f[2]);
    r.block_size = parse_int<uint32_t>(f[3]);
    r.run = f[4] == "median" ? kMedianRun : parse_int<int>(f[4]);
    r.wall_ns = parse_int<uint64_t>(f[5]);
    r.ops_per_sec = parse_double(f[6]);
    r.bytes_per_key = parse_double(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace packdb::bench
