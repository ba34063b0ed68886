// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS / FAIL / SKIP line per criterion, then a
// non-zero exit status if anything failed. Every threshold lives below.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "objstore/bench.hpp"
#include "objstore/client.hpp"
#include "objstore/shared_file.hpp"
#include "oracles/brute_reducer.hpp"
#include "oracles/scenarios.hpp"
#include "test_util.hpp"

using namespace objstore;
namespace fs = std::filesystem;
namespace sc = objstore::scenario;

namespace {

// Criterion 1
constexpr double kCorrectnessBudgetS = 300.0;
constexpr int kRoundTripObjects = 200;
constexpr int kEquivalenceArrays = 60;
constexpr int kOverwriteIterations = 1000;
constexpr int kRacingPairs = 100;
constexpr int kImmutabilityRounds = 10;

// Criterion 3
constexpr std::uint32_t kCrossBackendWorkers[] = {1, 2, 4, 8};

// Criterion 4
constexpr std::uint32_t kMethodCycles = 200;
constexpr std::uint32_t kMethodIoEvery = 5;
constexpr std::uint32_t kMethodRepeats = 5;
constexpr std::uint32_t kMethodPhases = 40;
constexpr std::uint32_t kMethodWorkers = 2;

// Criterion 5
constexpr std::uint32_t kTrendWorkers[] = {1, 2, 4, 8, 16};
constexpr std::uint32_t kTrendCycles = 40;
constexpr std::uint32_t kTrendIoEvery = 5;
constexpr std::uint32_t kTrendRepeats = 3;
constexpr double kObjstoreGrowthMax = 3.0;     // io(P=16) / io(P=1)
constexpr double kSharedFilePenaltyMin = 2.0;  // sharedfile io / objstore io at P=16
constexpr unsigned kReferenceCores = 8;

// Criterion 6
constexpr std::uint32_t kChunkTrendWorkers = 8;
constexpr std::uint64_t kChunkTrendRows[] = {16, 32, 64};
constexpr std::uint32_t kChunkTrendCycles = 40;
constexpr std::uint32_t kChunkTrendRepeats = 5;

// Criterion 7
constexpr int kReducerSets = 1000;

enum class Verdict { kPass, kFail, kSkip };

int failures = 0;

void verdict(int n, Verdict v, const std::string& what, const std::string& detail) {
  const char* tag = v == Verdict::kPass ? "PASS" : v == Verdict::kFail ? "FAIL" : "SKIP";
  if (v == Verdict::kFail) ++failures;
  std::cout << tag << " criterion " << n << ": " << what << " -- " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

bench::BenchConfig bench_config(const fs::path& root, bench::Backend b, std::uint32_t workers) {
  bench::BenchConfig c;
  c.backend = b;
  c.n_workers = workers;
  c.chunk_dims = {64, 4096};
  c.dtype = DType::kI32;
  c.root = root;
  return c;
}

// ---- 1 ------------------------------------------------------------------------

void correctness(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, sc::Outcome>> parts;
  std::uint64_t reads = 0;
  int ordered = 0;

  parts.emplace_back("round trip", sc::round_trip(work / "rt", 101, kRoundTripObjects));
  parts.emplace_back("chunked equivalence", sc::chunked_equivalence(work / "eq", 202, kEquivalenceArrays));
  parts.emplace_back("overwrite/reader stress", sc::overwrite_reader_stress(work / "ow", kOverwriteIterations, &reads));
  parts.emplace_back("racing commits", sc::racing_commits(work / "race", kRacingPairs, &ordered));
  parts.emplace_back("immutability", sc::immutability(work / "imm", 303, kImmutabilityRounds));
  for (const char* store : {"rt", "eq", "ow", "race", "imm"})
    parts.emplace_back(std::string("placement audit ") + store, sc::placement_audit(work / store));

  const double elapsed = seconds_since(t0);
  std::string bad;
  for (const auto& [name, o] : parts)
    if (!o.ok) bad += (bad.empty() ? "" : "; ") + name + ": " + o.detail;
  if (elapsed >= kCorrectnessBudgetS) bad += (bad.empty() ? "" : "; ") + std::string("over time budget");

  std::ostringstream d;
  d << parts.size() << " checks, " << kOverwriteIterations << " overwrites with " << reads << " concurrent reads, "
    << kRacingPairs << " racing pairs (" << ordered << " strictly ordered), " << fmt(elapsed, 1) << " s of "
    << kCorrectnessBudgetS << " s budget";
  if (!bad.empty()) d << "; " << bad;
  verdict(1, bad.empty() ? Verdict::kPass : Verdict::kFail, "correctness suite", d.str());
}

// ---- 2 ------------------------------------------------------------------------

void golden(const fs::path& work) {
  const fs::path dir = OBJSTORE_GOLDEN_DIR;
  ObjectId::Bytes b{};
  for (int i = 0; i < 16; ++i) b[i] = static_cast<std::uint8_t>(i);
  const ObjectId id(b);
  std::vector<std::string> bad;

  auto meta = [&](DType t, Dims dims, std::optional<Dims> chunk) {
    ObjectMeta m;
    m.id = id;
    m.dtype = t;
    m.shape = Shape(std::move(dims));
    if (chunk) m.grid = validate_chunking(m.shape, *chunk);
    return m;
  };
  struct MetaCase {
    const char* file;
    ObjectMeta m;
    std::size_t size;
  };
  const MetaCase metas[] = {
      {"meta_i32_64x4096.objm", meta(DType::kI32, {64, 4096}, std::nullopt), 42},
      {"meta_i32_256x4096_chunk64x4096.objm", meta(DType::kI32, {256, 4096}, Dims{64, 4096}), 66},
      {"meta_f64_4x6x8_chunk2x3x4.objm", meta(DType::kF64, {4, 6, 8}, Dims{2, 3, 4}), 82},
  };
  for (const auto& c : metas) {
    const auto fixture = testing::read_bytes(dir / c.file);
    const auto enc = meta_encode(c.m);
    if (fixture.size() != c.size || enc != fixture) bad.push_back(c.file);
    else if (!(meta_decode(fixture) == c.m)) bad.push_back(std::string(c.file) + " (decode)");
  }

  auto store = OsdStore::init(work / "golden", 1);
  const std::int32_t iv[] = {0, 1, 2, 3, -4, std::numeric_limits<std::int32_t>::max()};
  const float fv[] = {1.5f, -2.0f, 0.0f, 3.25f};
  store.write_chunk(id, 5, ObjectData::from_values<std::int32_t>(DType::kI32, Shape({2, 3}), iv));
  store.write_chunk(id, 0, ObjectData::from_values<float>(DType::kF32, Shape({4}), fv));
  if (testing::read_bytes(store.chunk_path(id, 5)) != testing::read_bytes(dir / "chunk_i32_2x3_part5.objc"))
    bad.push_back("chunk_i32_2x3_part5.objc");
  if (testing::read_bytes(store.chunk_path(id, 0)) != testing::read_bytes(dir / "chunk_f32_4_part0.objc"))
    bad.push_back("chunk_f32_4_part0.objc");
  if (chunk_header_size(2) != 48) bad.push_back("rank-2 chunk header size");

  std::string detail = "5 fixtures byte-exact; OBJM 42 B unchunked, 66 B chunked rank 2";
  if (!bad.empty()) {
    detail = "mismatch:";
    for (const auto& s : bad) detail += " " + s;
  }
  verdict(2, bad.empty() ? Verdict::kPass : Verdict::kFail, "format golden files", detail);
}

// ---- 3 ------------------------------------------------------------------------

void cross_backend(const fs::path& work) {
  std::string bad;
  std::uint64_t compared = 0;
  for (auto P : kCrossBackendWorkers) {
    auto oc = bench_config(work / "xb", bench::Backend::kObjStore, P);
    oc.cycles = 10;
    oc.repeats = 1;
    oc.compute_units = 1;
    oc.keep_data = true;
    auto sc_cfg = oc;
    sc_cfg.backend = bench::Backend::kSharedFile;
    const auto obj_run = bench::run_benchmark(oc).front();
    const auto shf_run = bench::run_benchmark(sc_cfg).front();

    auto store = ObjectStore::open(obj_run.data_root);
    for (std::uint32_t k = 0; k < oc.phases(); ++k) {
      auto a = store.get(bench::phase_object_name(k)).second;
      auto f = SharedFile::open(shf_run.data_root / bench::phase_file_name(k), P);
      auto b = f.read_all();
      if (a.dtype != b.dtype || a.shape != b.shape || a.payload != b.payload)
        bad += " P=" + std::to_string(P) + "/phase " + std::to_string(k);
      ++compared;
    }
    fs::remove_all(obj_run.data_root);
    fs::remove_all(shf_run.data_root);
  }
  verdict(3, bad.empty() ? Verdict::kPass : Verdict::kFail, "cross-backend equivalence",
          bad.empty() ? std::to_string(compared) + " phase arrays bit-identical for P in {1,2,4,8}"
                      : "differs at" + bad);
}

// ---- 4 ------------------------------------------------------------------------

void methodology(const fs::path& work) {
  std::string bad;
  std::ostringstream summary_text;
  for (auto backend : {bench::Backend::kObjStore, bench::Backend::kSharedFile}) {
    auto cfg = bench_config(work / "method", backend, kMethodWorkers);
    cfg.cycles = kMethodCycles;
    cfg.io_every = kMethodIoEvery;
    cfg.repeats = kMethodRepeats;
    const auto runs = bench::run_benchmark(cfg);

    std::vector<bench::RunStats> stats;
    for (const auto& r : runs) {
      if (r.stats.phases.size() != kMethodPhases) bad += " phases=" + std::to_string(r.stats.phases.size());
      stats.push_back(r.stats);
    }
    std::ostringstream csv, table;
    const auto s = bench::report(cfg, stats, bench::ReportLevel::kSummary, csv, table);
    std::vector<double> bw;
    for (const auto& r : stats) bw.push_back(r.bandwidth_mib_s);
    std::sort(bw.begin(), bw.end());
    std::istringstream back(csv.str());
    const auto rows = bench::read_summary_csv(back);
    if (runs.size() != kMethodRepeats || s.repeats != kMethodRepeats) bad += " repeats";
    if (s.bw_median_mib_s != bw[2] || s.bw_min_mib_s != bw.front() || s.bw_max_mib_s != bw.back()) bad += " order-stats";
    if (rows.size() != 1 || rows[0].repeats != kMethodRepeats || rows[0].bw_median_mib_s != s.bw_median_mib_s)
      bad += " csv";
    summary_text << " " << bench::backend_name(backend) << " median " << fmt(s.bw_median_mib_s, 1) << " MiB/s ["
                 << fmt(s.bw_min_mib_s, 1) << ", " << fmt(s.bw_max_mib_s, 1) << "]";
  }
  verdict(4, bad.empty() ? Verdict::kPass : Verdict::kFail, "methodology (40 phases, 5 repeats, median/min/max)",
          bad.empty() ? "both arms:" + summary_text.str() : "problems:" + bad);
}

// ---- 5 ------------------------------------------------------------------------

void scaling_trend(const fs::path& work) {
  std::vector<bench::Summary> rows;
  double obj_io_1 = 0, obj_io_16 = 0, shf_io_16 = 0;
  for (auto backend : {bench::Backend::kObjStore, bench::Backend::kSharedFile}) {
    for (auto P : kTrendWorkers) {
      auto cfg = bench_config(work / "trend", backend, P);
      cfg.cycles = kTrendCycles;
      cfg.io_every = kTrendIoEvery;
      cfg.repeats = kTrendRepeats;
      cfg.n_osd = 16;
      cfg.procs_per_stripe = 32;  // stripe_count 1 for every P here
      std::vector<bench::RunStats> stats;
      for (auto& r : bench::run_benchmark(cfg)) stats.push_back(std::move(r.stats));
      auto s = bench::summarize(cfg, stats);
      if (backend == bench::Backend::kObjStore && P == 1) obj_io_1 = s.io_time_mean_s;
      if (backend == bench::Backend::kObjStore && P == 16) obj_io_16 = s.io_time_mean_s;
      if (backend == bench::Backend::kSharedFile && P == 16) shf_io_16 = s.io_time_mean_s;
      rows.push_back(std::move(s));
    }
  }
  std::cout << "\nweak scaling, chunk 64x4096 i32, " << kTrendCycles << " cycles / io every " << kTrendIoEvery << ", "
            << kTrendRepeats << " repeats\n";
  bench::print_table(std::cout, rows);
  std::cout << '\n';

  const double growth = obj_io_16 / obj_io_1;
  const double penalty = shf_io_16 / obj_io_16;
  const bool a = growth <= kObjstoreGrowthMax;
  const bool b = penalty >= kSharedFilePenaltyMin;
  std::ostringstream d;
  d << "(a) objstore io P16/P1 = " << fmt(growth, 2) << " (need <= " << kObjstoreGrowthMax << ") "
    << (a ? "met" : "not met") << "; (b) sharedfile/objstore io at P16 = " << fmt(penalty, 2) << " (need >= "
    << kSharedFilePenaltyMin << ") " << (b ? "met" : "not met");

  const unsigned cores = std::thread::hardware_concurrency();
  if (cores < kReferenceCores) {
    d << "; only " << cores << " core(s), reference hardware needs >= " << kReferenceCores;
    verdict(5, Verdict::kSkip, "weak-scaling trend", d.str());
  } else {
    verdict(5, a && b ? Verdict::kPass : Verdict::kFail, "weak-scaling trend", d.str());
  }
}

// ---- 6 ------------------------------------------------------------------------

void chunk_trend(const fs::path& work) {
  std::vector<bench::Summary> rows;
  for (auto rows_per_chunk : kChunkTrendRows) {
    auto cfg = bench_config(work / "chunks", bench::Backend::kObjStore, kChunkTrendWorkers);
    cfg.chunk_dims = {rows_per_chunk, 4096};
    cfg.cycles = kChunkTrendCycles;
    cfg.repeats = kChunkTrendRepeats;
    std::vector<bench::RunStats> stats;
    for (auto& r : bench::run_benchmark(cfg)) stats.push_back(std::move(r.stats));
    rows.push_back(bench::summarize(cfg, stats));
  }
  std::cout << "\nchunk-size sweep, P=" << kChunkTrendWorkers << ", objstore, " << kChunkTrendRepeats << " repeats\n";
  bench::print_table(std::cout, rows);
  std::cout << '\n';

  // Non-decreasing within repeat noise: each median must reach the previous
  // size's slowest repeat.
  bool ok = true;
  std::ostringstream d;
  d << "medians";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d << (i ? " -> " : " ") << fmt(rows[i].bw_median_mib_s, 1);
    if (i > 0 && rows[i].bw_median_mib_s < rows[i - 1].bw_min_mib_s) ok = false;
  }
  d << " MiB/s for " << kChunkTrendRows[0] << "/" << kChunkTrendRows[1] << "/" << kChunkTrendRows[2]
    << "x4096; rule: median(next) >= min(prev)";
  verdict(6, ok ? Verdict::kPass : Verdict::kFail, "chunk-size trend", d.str());
}

// ---- 7 ------------------------------------------------------------------------

void reducer_oracle() {
  int agree = 0, rejected = 0;
  std::string first_bad;
  for (int i = 0; i < kReducerSets; ++i) {
    std::uint32_t workers = 0;
    const auto recs = oracle::random_records(0x5eed0000ULL + static_cast<std::uint64_t>(i), &workers);
    const auto ref = oracle::brute_reduce(recs, workers);
    std::optional<bench::RunStats> got;
    try {
      got = bench::aggregate(recs, workers);
    } catch (const Error&) {
    }
    bool same = ref.has_value() == got.has_value();
    if (same && ref) {
      same = got->phases.size() == ref->phases.size() && got->total_bytes == ref->bytes &&
             got->total_span == ref->span && got->total_io_time == ref->io_time &&
             got->bandwidth_mib_s == ref->bandwidth;
      for (std::size_t k = 0; same && k < ref->phases.size(); ++k) {
        const auto& g = got->phases[k];
        const auto& r = ref->phases[k];
        same = g.total_bytes == r.bytes && g.io_span == r.span && g.bandwidth_mib_s == r.bandwidth &&
               g.worker_io_time == r.worker_time && g.max_worker_io_time == r.slowest;
      }
    }
    if (!ref) ++rejected;
    if (same) ++agree;
    else if (first_bad.empty()) first_bad = "set " + std::to_string(i);
  }
  std::ostringstream d;
  d << agree << "/" << kReducerSets << " record sets agree exactly (" << rejected << " rejected by both)";
  if (!first_bad.empty()) d << "; first disagreement at " << first_bad;
  verdict(7, agree == kReducerSets ? Verdict::kPass : Verdict::kFail, "aggregation oracle", d.str());
}

void guarded(int n, const std::string& what, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    verdict(n, Verdict::kFail, what, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  testing::TempDir work;
  std::cout << "acceptance run in " << work.path().string() << ", " << std::thread::hardware_concurrency()
            << " hardware thread(s)\n";
  guarded(1, "correctness suite", [&] { correctness(work / "c1"); });
  guarded(2, "format golden files", [&] { golden(work / "c2"); });
  guarded(3, "cross-backend equivalence", [&] { cross_backend(work / "c3"); });
  guarded(4, "methodology", [&] { methodology(work / "c4"); });
  guarded(5, "weak-scaling trend", [&] { scaling_trend(work / "c5"); });
  guarded(6, "chunk-size trend", [&] { chunk_trend(work / "c6"); });
  guarded(7, "aggregation oracle", [] { reducer_oracle(); });
  std::cout << (failures ? "acceptance: FAILED (" + std::to_string(failures) + ")" : std::string("acceptance: all evaluated criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
