// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "objstore/bench.hpp"
#include "objstore/client.hpp"
#include "oracles/brute_reducer.hpp"
#include "oracles/scenarios.hpp"
#include "test_util.hpp"

using namespace objstore;
using namespace objstore::bench;
using namespace objstore::testing;
namespace fs = std::filesystem;

namespace {

BenchConfig small_config(const fs::path& root, Backend b, std::uint32_t workers, std::uint32_t cycles) {
  BenchConfig c;
  c.backend = b;
  c.n_workers = workers;
  c.chunk_dims = {16, 512};
  c.cycles = cycles;
  c.io_every = 5;
  c.repeats = 1;
  c.n_osd = 4;
  c.procs_per_stripe = 2;
  c.compute_units = 1;
  c.root = root;
  return c;
}

RunStats with_bandwidth(double bw, double io = 0) {
  RunStats r;
  r.bandwidth_mib_s = bw;
  r.total_io_time = io;
  return r;
}

}  // namespace

TEST_CASE("aggregate: single op") {
  auto s = aggregate({{0, 0, OpKind::kPutChunk, 1048576, 10.0, 0.5}}, 1);
  REQUIRE(s.phases.size() == 1);
  CHECK(s.phases[0].bandwidth_mib_s == 2.0);
  CHECK(s.phases[0].io_span == 0.5);
  CHECK(s.bandwidth_mib_s == 2.0);
  CHECK(s.total_io_time == 0.5);
}

TEST_CASE("aggregate: overlapping workers") {
  auto s = aggregate({{0, 0, OpKind::kPutChunk, 1048576, 1.0, 0.5}, {1, 0, OpKind::kPutChunk, 1048576, 1.0, 0.5}}, 2);
  CHECK(s.phases[0].bandwidth_mib_s == 4.0);
  CHECK(s.total_bytes == 2097152);
  CHECK(s.phases[0].worker_io_time == std::vector<double>{0.5, 0.5});
}

TEST_CASE("aggregate: barrier and commit time count toward the phase") {
  auto s = aggregate({{0, 0, OpKind::kPutChunk, 1048576, 0.0, 0.25},
                      {1, 0, OpKind::kPutChunk, 1048576, 0.0, 0.5},
                      {0, 0, OpKind::kBarrier, 0, 0.25, 0.25},
                      {1, 0, OpKind::kBarrier, 0, 0.5, 0.0},
                      {0, 0, OpKind::kCommit, 0, 0.5, 0.5}},
                     2);
  CHECK(s.phases[0].io_span == 1.0);
  CHECK(s.phases[0].worker_io_time == std::vector<double>{1.0, 0.5});
  CHECK(s.total_io_time == 1.0);
  CHECK(s.bandwidth_mib_s == 2.0);
}

TEST_CASE("aggregate rejects incomplete input") {
  CHECK(error_code_of([] { aggregate({}, 1); }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] { aggregate({{1, 0, OpKind::kPutChunk, 1, 0, 1}}, 1); }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] { aggregate({{0, 0, OpKind::kPutChunk, 1, 0, 1}}, 2); }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] {
          aggregate({{0, 0, OpKind::kPutChunk, 1, 0, 1}, {0, 2, OpKind::kPutChunk, 1, 5, 1}}, 1);
        }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] {
          aggregate({{0, 0, OpKind::kBarrier, 0, 0, 1}}, 1);
        }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] { aggregate({{0, 0, OpKind::kPutChunk, 1, 3, 0}}, 1); }) == ErrorCode::kIncompletePhase);
  CHECK(error_code_of([] { aggregate({{0, 0, OpKind::kPutChunk, 1, 3, -1}}, 1); }) == ErrorCode::kInvariantViolation);
}

TEST_CASE("aggregate agrees with the brute-force reducer") {
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::uint32_t workers = 0;
    auto recs = oracle::random_records(seed, &workers);
    auto ref = oracle::brute_reduce(recs, workers);
    if (!ref) {
      CHECK(error_code_of([&] { aggregate(recs, workers); }) == ErrorCode::kIncompletePhase);
      ++rejected;
      continue;
    }
    auto got = aggregate(recs, workers);
    REQUIRE(got.phases.size() == ref->phases.size());
    for (std::size_t k = 0; k < got.phases.size(); ++k) {
      CHECK(got.phases[k].total_bytes == ref->phases[k].bytes);
      CHECK(got.phases[k].io_span == ref->phases[k].span);
      CHECK(got.phases[k].bandwidth_mib_s == ref->phases[k].bandwidth);
      CHECK(got.phases[k].worker_io_time == ref->phases[k].worker_time);
      CHECK(got.phases[k].max_worker_io_time == ref->phases[k].slowest);
    }
    CHECK(got.total_bytes == ref->bytes);
    CHECK(got.total_span == ref->span);
    CHECK(got.total_io_time == ref->io_time);
    CHECK(got.bandwidth_mib_s == ref->bandwidth);
  }
  CHECK(rejected < 30);
}

TEST_CASE("aggregate is invariant to order and time shifts, and scales with time") {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    std::uint32_t workers = 0;
    auto recs = oracle::random_records(seed, &workers);
    if (!oracle::brute_reduce(recs, workers)) continue;
    auto base = aggregate(recs, workers);

    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto shifted = recs;
    for (auto& r : shifted) r.start += 64.0;
    auto doubled = recs;
    for (auto& r : doubled) r.start *= 2, r.duration *= 2;

    CHECK(aggregate(shuffled, workers).bandwidth_mib_s == base.bandwidth_mib_s);
    CHECK(aggregate(shifted, workers).total_span == base.total_span);
    CHECK(aggregate(shifted, workers).bandwidth_mib_s == base.bandwidth_mib_s);
    auto d = aggregate(doubled, workers);
    CHECK(d.bandwidth_mib_s == base.bandwidth_mib_s / 2);
    CHECK(d.total_io_time == base.total_io_time * 2);
  }
}

TEST_CASE("order statistics over repeats") {
  BenchConfig cfg;
  auto s = summarize(cfg, {with_bandwidth(3), with_bandwidth(1), with_bandwidth(2), with_bandwidth(5), with_bandwidth(4)});
  CHECK(s.bw_median_mib_s == 3);
  CHECK(s.bw_min_mib_s == 1);
  CHECK(s.bw_max_mib_s == 5);
  CHECK(s.repeats == 5);

  auto one = summarize(cfg, {with_bandwidth(7.5)});
  CHECK(one.bw_median_mib_s == 7.5);
  CHECK(one.bw_min_mib_s == 7.5);
  CHECK(one.bw_max_mib_s == 7.5);

  auto io = summarize(cfg, {with_bandwidth(1, 2.0), with_bandwidth(1, 4.0)});
  CHECK(io.io_time_mean_s == 3.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(mean({2.0, 4.0}) == 3.0);
}

TEST_CASE("configuration") {
  BenchConfig c;
  c.root = "/tmp/x";
  CHECK(c.phases() == 40);
  c.n_workers = 4;
  CHECK(c.phase_shape() == Shape({256, 4096}));
  CHECK(c.chunk_bytes() == 1048576);
  CHECK(c.tag() == "objstore-p4-c64x4096");
  c.validate();
  c.cycles = 201;
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::kConfigInvalid);
  c.cycles = 200;
  c.repeats = 0;
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::kConfigInvalid);
  c.repeats = 1;
  c.chunk_dims = {0, 4};
  CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::kConfigInvalid);
}

TEST_CASE("worker blocks tile the phase array") {
  for (auto dtype : {DType::kI32, DType::kF32, DType::kF64}) {
    BenchConfig c;
    c.n_workers = 3;
    c.chunk_dims = {4, 16};
    c.dtype = dtype;
    auto full = phase_array(c, 7);
    std::vector<std::byte> cat;
    for (std::uint32_t w = 0; w < 3; ++w) {
      auto b = worker_block(c, 7, w);
      cat.insert(cat.end(), b.payload.begin(), b.payload.end());
    }
    CHECK(cat == full.payload);
    CHECK(phase_array(c, 8).payload != full.payload);
    CHECK(phase_array(c, 7) == full);
  }
}

TEST_CASE("objstore run: phases, bytes, barrier order and stored objects") {
  TempDir dir;
  auto cfg = small_config(dir.path(), Backend::kObjStore, 3, 200);
  cfg.keep_data = true;
  cfg.verify_commit = true;
  auto runs = run_benchmark(cfg);
  REQUIRE(runs.size() == 1);
  const auto& run = runs[0];
  CHECK(run.stats.phases.size() == 40);
  for (const auto& ph : run.stats.phases) CHECK(ph.total_bytes == 3 * cfg.chunk_bytes());
  CHECK(run.stats.compute_time > 0);

  for (std::uint32_t k = 0; k < 40; ++k) {
    double last_put_end = 0, commit_start = -1;
    int puts = 0, commits = 0;
    for (const auto& r : run.records) {
      if (r.phase != k) continue;
      if (r.kind == OpKind::kPutChunk) last_put_end = std::max(last_put_end, r.end()), ++puts;
      if (r.kind == OpKind::kCommit) commit_start = r.start, ++commits;
    }
    CHECK(puts == 3);
    CHECK(commits == 1);
    CHECK(commit_start >= last_put_end);
  }

  auto store = ObjectStore::open(run.data_root);
  auto names = store.list();
  CHECK(names.size() == 40);
  for (std::uint32_t k = 0; k < 40; ++k) {
    auto [meta, data] = store.get(phase_object_name(k));
    CHECK(meta.shape == Shape({48, 512}));
    CHECK(meta.layout().chunk_count == 3);
    CHECK(data == phase_array(cfg, k));
  }
  auto audit = scenario::placement_audit(run.data_root);
  INFO(audit.detail);
  CHECK(audit.ok);
}

TEST_CASE("sharedfile run leaves one complete file per phase") {
  TempDir dir;
  auto cfg = small_config(dir.path(), Backend::kSharedFile, 4, 20);
  cfg.keep_data = true;
  auto runs = run_benchmark(cfg);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].stats.phases.size() == 4);
  for (std::uint32_t k = 0; k < 4; ++k) {
    auto f = SharedFile::open(runs[0].data_root / phase_file_name(k), 4);
    CHECK(f.stripe_count() == 2);
    CHECK(f.read_all() == phase_array(cfg, k));
  }
  for (const auto& r : runs[0].records) CHECK((r.kind == OpKind::kSharedWrite && r.bytes == cfg.chunk_bytes()));
}

TEST_CASE("repeats, cleanup and raw records") {
  TempDir dir;
  auto cfg = small_config(dir / "data", Backend::kObjStore, 2, 10);
  cfg.repeats = 3;
  cfg.records_dir = dir / "records";
  auto runs = run_benchmark(cfg);
  CHECK(runs.size() == 3);
  for (const auto& r : runs) CHECK_FALSE(fs::exists(r.data_root));
  for (std::uint32_t rep = 0; rep < 3; ++rep) {
    std::ifstream in(dir / "records" / (cfg.tag() + "-rep" + std::to_string(rep) + ".csv"));
    REQUIRE(in);
    auto recs = read_records_csv(in);
    CHECK(recs == runs[rep].records);
    CHECK(aggregate(recs, 2).bandwidth_mib_s == runs[rep].stats.bandwidth_mib_s);
  }
}

TEST_CASE("csv round trips") {
  std::uint32_t workers = 0;
  auto recs = oracle::random_records(77, &workers);
  for (auto& r : recs) r.start += 1.0 / 3.0;
  std::stringstream ss;
  write_records_csv(ss, recs);
  CHECK(ss.str().rfind(std::string(kRecordCsvHeader) + "\n", 0) == 0);
  CHECK(read_records_csv(ss) == recs);

  Summary s{"objstore", 4, 64, 4096, "i32", 16, 0, 5, 1.0 / 3.0, 0.1, 9.75, 2.5, 0.125};
  std::stringstream cs;
  write_summary_csv(cs, {s, s});
  auto back = read_summary_csv(cs);
  REQUIRE(back.size() == 2);
  CHECK(back[0].bw_median_mib_s == s.bw_median_mib_s);
  CHECK(back[1].backend == "objstore");
  CHECK(back[1].repeats == 5);

  std::stringstream bad("objstore,1,2\n");
  CHECK(error_code_of([&] { read_summary_csv(bad); }) == ErrorCode::kIoError);
}
