// SPDX-License-Identifier: Apache-2.0

#include "objstore/bench.hpp"

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "byte_io.hpp"
#include "ipc.hpp"
#include "objstore/client.hpp"
#include "objstore/error.hpp"

namespace fs = std::filesystem;

namespace objstore::bench {

std::string_view backend_name(Backend b) { return b == Backend::kObjStore ? "objstore" : "sharedfile"; }

std::optional<Backend> parse_backend(std::string_view s) {
  if (s == "objstore") return Backend::kObjStore;
  if (s == "sharedfile") return Backend::kSharedFile;
  return std::nullopt;
}

std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::kPutChunk: return "put_chunk";
    case OpKind::kCommit: return "commit";
    case OpKind::kSharedWrite: return "shared_write";
    case OpKind::kBarrier: return "barrier";
  }
  return "?";
}

std::optional<OpKind> parse_op(std::string_view s) {
  for (auto k : {OpKind::kPutChunk, OpKind::kCommit, OpKind::kSharedWrite, OpKind::kBarrier})
    if (op_name(k) == s) return k;
  return std::nullopt;
}

// ---- config -----------------------------------------------------------------

Shape BenchConfig::phase_shape() const {
  auto dims = chunk_dims;
  dims[0] *= n_workers;
  return Shape(std::move(dims));
}

std::uint64_t BenchConfig::chunk_bytes() const { return Shape(chunk_dims).element_count() * elem_size(dtype); }

std::string BenchConfig::tag() const {
  return std::string(backend_name(backend)) + "-p" + std::to_string(n_workers) + "-c" + format_dims(chunk_dims);
}

void BenchConfig::validate() const {
  auto bad = [](const std::string& why) { throw_error(ErrorCode::kConfigInvalid, why); };
  if (n_workers == 0) bad("workers must be >= 1");
  if (chunk_dims.empty() || std::find(chunk_dims.begin(), chunk_dims.end(), 0) != chunk_dims.end())
    bad("chunk dims must be positive");
  if (io_every == 0 || cycles == 0) bad("cycles and io_every must be >= 1");
  if (cycles % io_every != 0) bad("cycles must be a multiple of io_every");
  if (repeats == 0) bad("repeats must be >= 1");
  if (backend == Backend::kObjStore && n_osd == 0) bad("n_osd must be >= 1");
  if (backend == Backend::kSharedFile && procs_per_stripe == 0) bad("procs_per_stripe must be >= 1");
  if (root.empty()) bad("bench root is empty");
  try {
    phase_shape();
  } catch (const Error& e) {
    bad(e.what());
  }
}

fs::path default_bench_root() {
  if (const char* env = std::getenv("OBJSTORE_EMU_ROOT"); env && *env) return env;
  return fs::temp_directory_path() / "objstore-emu-bench";
}

std::string phase_object_name(std::uint32_t phase) { return "phase-" + std::to_string(phase); }
fs::path phase_file_name(std::uint32_t phase) { return "phase-" + std::to_string(phase) + ".dat"; }

// ---- deterministic content ---------------------------------------------------

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void fill(DType dtype, std::uint32_t phase, std::uint64_t first_elem, std::span<std::byte> out) {
  const std::size_t esize = elem_size(dtype);
  const std::uint64_t n = out.size() / esize;
  const std::uint64_t salt = std::uint64_t{phase} << 44;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t z = mix(salt ^ (first_elem + i));
    std::byte* p = out.data() + i * esize;
    switch (dtype) {
      case DType::kI32: {
        auto v = static_cast<std::uint32_t>(z);
        std::memcpy(p, &v, 4);
        break;
      }
      case DType::kF32: {
        auto v = static_cast<float>(z >> 40) * 0.5f;
        std::memcpy(p, &v, 4);
        break;
      }
      case DType::kF64: {
        auto v = static_cast<double>(z >> 11) * 0x1.0p-53;
        std::memcpy(p, &v, 8);
        break;
      }
    }
  }
}

}  // namespace

ObjectData phase_array(const BenchConfig& config, std::uint32_t phase) {
  ObjectData d(config.dtype, config.phase_shape());
  fill(config.dtype, phase, 0, d.payload);
  return d;
}

ObjectData worker_block(const BenchConfig& config, std::uint32_t phase, std::uint32_t worker) {
  Shape shape(config.chunk_dims);
  ObjectData d(config.dtype, shape);
  fill(config.dtype, phase, std::uint64_t{worker} * shape.element_count(), d.payload);
  return d;
}

// ---- aggregation -------------------------------------------------------------

RunStats aggregate(const std::vector<OpRecord>& records, std::uint32_t n_workers) {
  if (records.empty()) throw_error(ErrorCode::kIncompletePhase, "no records");
  if (n_workers == 0) throw_error(ErrorCode::kIncompletePhase, "zero workers");

  std::uint32_t max_phase = 0;
  for (const auto& r : records) {
    if (r.worker >= n_workers)
      throw_error(ErrorCode::kIncompletePhase, "record from worker " + std::to_string(r.worker));
    if (!(r.duration >= 0) || !std::isfinite(r.start))
      throw_error(ErrorCode::kInvariantViolation, "negative or non-finite timing");
    max_phase = std::max(max_phase, r.phase);
  }

  RunStats run;
  run.phases.resize(std::size_t{max_phase} + 1);
  std::vector<double> min_start(run.phases.size(), INFINITY), max_end(run.phases.size(), -INFINITY);
  std::vector<std::vector<bool>> has_data(run.phases.size(), std::vector<bool>(n_workers, false));
  for (std::size_t k = 0; k < run.phases.size(); ++k) {
    run.phases[k].phase = static_cast<std::uint32_t>(k);
    run.phases[k].worker_io_time.assign(n_workers, 0.0);
  }

  for (const auto& r : records) {
    auto& ph = run.phases[r.phase];
    ph.total_bytes += r.bytes;
    ph.worker_io_time[r.worker] += r.duration;
    min_start[r.phase] = std::min(min_start[r.phase], r.start);
    max_end[r.phase] = std::max(max_end[r.phase], r.end());
    if (is_data_op(r.kind)) has_data[r.phase][r.worker] = true;
  }

  for (std::size_t k = 0; k < run.phases.size(); ++k) {
    auto& ph = run.phases[k];
    for (std::uint32_t w = 0; w < n_workers; ++w)
      if (!has_data[k][w])
        throw_error(ErrorCode::kIncompletePhase,
                    "phase " + std::to_string(k) + " has no data op from worker " + std::to_string(w));
    ph.io_span = max_end[k] - min_start[k];
    if (!(ph.io_span > 0)) throw_error(ErrorCode::kIncompletePhase, "phase " + std::to_string(k) + " has zero span");
    ph.bandwidth_mib_s = static_cast<double>(ph.total_bytes) / 1048576.0 / ph.io_span;
    ph.max_worker_io_time = *std::max_element(ph.worker_io_time.begin(), ph.worker_io_time.end());

    run.total_bytes += ph.total_bytes;
    run.total_span += ph.io_span;
    run.total_io_time += ph.max_worker_io_time;
  }
  run.bandwidth_mib_s = static_cast<double>(run.total_bytes) / 1048576.0 / run.total_span;
  return run;
}

// ---- workers -----------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point epoch, Clock::time_point t) {
  return std::chrono::duration<double>(t - epoch).count();
}

/// Three-point smoothing passes over a private field: the stand-in for the
/// application's computational cycle.
class ComputeKernel {
 public:
  explicit ComputeKernel(std::uint64_t n, std::uint32_t seed) : a_(n), b_(n) {
    for (std::uint64_t i = 0; i < n; ++i) a_[i] = static_cast<float>((i * 2654435761u + seed) % 1000) * 1e-3f;
  }

  void run(std::uint32_t passes) {
    const std::size_t n = a_.size();
    for (std::uint32_t p = 0; p < passes; ++p) {
      b_[0] = a_[0];
      b_[n - 1] = a_[n - 1];
      for (std::size_t i = 1; i + 1 < n; ++i) b_[i] = (a_[i - 1] + a_[i] + a_[i + 1]) * (1.0f / 3.0f);
      a_.swap(b_);
    }
  }

  float checksum() const { return std::accumulate(a_.begin(), a_.end(), 0.0f); }

 private:
  std::vector<float> a_, b_;
};

std::vector<std::byte> encode_records(const std::vector<OpRecord>& recs, double compute_time) {
  detail::ByteWriter w(8 + recs.size() * 37);
  w.u64(std::bit_cast<std::uint64_t>(compute_time));
  for (const auto& r : recs) {
    w.u32(r.worker);
    w.u32(r.phase);
    w.u8(static_cast<std::uint8_t>(r.kind));
    w.u64(r.bytes);
    w.u64(std::bit_cast<std::uint64_t>(r.start));
    w.u64(std::bit_cast<std::uint64_t>(r.duration));
  }
  return w.take();
}

bool decode_records(std::span<const std::byte> bytes, std::vector<OpRecord>& out, double& compute_time) {
  detail::ByteReader r(bytes);
  std::uint64_t bits = 0;
  if (!r.u64(bits)) return false;
  compute_time = std::bit_cast<double>(bits);
  while (r.remaining()) {
    OpRecord rec;
    std::uint8_t kind = 0;
    std::uint64_t start = 0, dur = 0;
    if (!r.u32(rec.worker) || !r.u32(rec.phase) || !r.u8(kind) || !r.u64(rec.bytes) || !r.u64(start) || !r.u64(dur))
      return false;
    rec.kind = static_cast<OpKind>(kind);
    rec.start = std::bit_cast<double>(start);
    rec.duration = std::bit_cast<double>(dur);
    out.push_back(rec);
  }
  return true;
}

struct WorkerContext {
  const BenchConfig& config;
  std::uint32_t rank;
  int fd;
  fs::path run_root;
  Clock::time_point epoch;
};

ipc::Message expect(int fd, ipc::Msg type) {
  auto m = ipc::recv(fd);
  if (!m || m->type != type) throw_error(ErrorCode::kWorkerFailure, "coordinator went away");
  return std::move(*m);
}

void post(int fd, ipc::Msg type, std::span<const std::byte> payload = {}) {
  if (!ipc::send(fd, type, payload)) throw_error(ErrorCode::kWorkerFailure, "coordinator went away");
}

void worker_main(const WorkerContext& ctx) {
  const auto& cfg = ctx.config;
  const bool objstore = cfg.backend == Backend::kObjStore;
  std::optional<ObjectStore> store;
  if (objstore) store = ObjectStore::open(ctx.run_root, cfg.n_osd);

  std::vector<OpRecord> records;
  auto timed = [&](std::uint32_t phase, OpKind kind, std::uint64_t bytes, auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    records.push_back({ctx.rank, phase, kind, bytes, seconds_since(ctx.epoch, t0),
                       std::chrono::duration<double>(t1 - t0).count()});
  };

  ComputeKernel kernel(Shape(cfg.chunk_dims).element_count(), ctx.rank);
  double compute_time = 0;

  for (std::uint32_t cycle = 1; cycle <= cfg.cycles; ++cycle) {
    const auto c0 = Clock::now();
    kernel.run(cfg.compute_units);
    compute_time += std::chrono::duration<double>(Clock::now() - c0).count();
    if (cycle % cfg.io_every != 0) continue;

    const std::uint32_t phase = cycle / cfg.io_every - 1;
    const auto block = worker_block(cfg, phase, ctx.rank);

    if (objstore) {
      std::optional<PutSession> session;
      if (ctx.rank == 0) {
        session = store->begin_chunked_put(phase_object_name(phase), cfg.dtype, cfg.phase_shape(), cfg.chunk_dims);
        post(ctx.fd, ipc::Msg::kToken, session->token().serialize());
      } else {
        post(ctx.fd, ipc::Msg::kReady);
      }
      const auto token = SessionToken::deserialize(expect(ctx.fd, ipc::Msg::kToken).payload);

      timed(phase, OpKind::kPutChunk, block.payload.size(), [&] { store->put_chunk(token, ctx.rank, block); });
      timed(phase, OpKind::kBarrier, 0, [&] {
        post(ctx.fd, ipc::Msg::kArrive);
        expect(ctx.fd, ipc::Msg::kRelease);
      });
      if (ctx.rank == 0) timed(phase, OpKind::kCommit, 0, [&] { store->commit(*session, cfg.verify_commit); });
    } else {
      const auto path = ctx.run_root / phase_file_name(phase);
      if (ctx.rank == 0) {
        SharedFileConfig sc{path, cfg.dtype, cfg.phase_shape(), cfg.n_workers, cfg.procs_per_stripe};
        SharedFile::create(sc, cfg.lock_mode);
      }
      post(ctx.fd, ipc::Msg::kReady);
      expect(ctx.fd, ipc::Msg::kGo);
      auto handle = SharedFile::open(path, cfg.n_workers, cfg.lock_mode);
      timed(phase, OpKind::kSharedWrite, block.payload.size(), [&] { handle.write_region(ctx.rank, block); });
    }
  }

  // Keeps the kernel from being optimized away.
  [[maybe_unused]] volatile float sink = kernel.checksum();
  post(ctx.fd, ipc::Msg::kDone, encode_records(records, compute_time));
}

/// Owns the forked workers of one run; kills and reaps them on destruction.
class WorkerGroup {
 public:
  WorkerGroup(const BenchConfig& config, const fs::path& run_root, Clock::time_point epoch) {
    const auto n = config.n_workers;
    std::vector<std::array<int, 2>> pairs(n);
    for (auto& p : pairs)
      if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, p.data()) != 0) throw_errno("socketpair");

    std::cout.flush();
    std::cerr.flush();
    for (std::uint32_t w = 0; w < n; ++w) {
      pid_t pid = ::fork();
      if (pid < 0) {
        for (auto& p : pairs) ::close(p[0]), ::close(p[1]);
        throw_errno("fork");
      }
      if (pid == 0) {
        for (std::uint32_t i = 0; i < n; ++i) {
          ::close(pairs[i][0]);
          if (i != w) ::close(pairs[i][1]);
        }
        int code = 0;
        try {
          worker_main({config, w, pairs[w][1], run_root, epoch});
        } catch (const std::exception& e) {
          std::string msg = "worker " + std::to_string(w) + ": " + e.what();
          ipc::send(pairs[w][1], ipc::Msg::kError,
                    std::span<const std::byte>(reinterpret_cast<const std::byte*>(msg.data()), msg.size()));
          code = 1;
        }
        ::_exit(code);
      }
      pids_.push_back(pid);
    }
    for (auto& p : pairs) {
      ::close(p[1]);
      fds_.push_back(p[0]);
    }
  }

  ~WorkerGroup() {
    if (!reaped_) {
      for (auto pid : pids_) ::kill(pid, SIGKILL);
      reap();
    }
    for (int fd : fds_) ::close(fd);
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(fds_.size()); }

  ipc::Message recv(std::uint32_t w) {
    auto m = ipc::recv(fds_[w]);
    if (!m) fail("worker " + std::to_string(w) + " exited unexpectedly");
    if (m->type == ipc::Msg::kError) fail(std::string(reinterpret_cast<const char*>(m->payload.data()), m->payload.size()));
    return std::move(*m);
  }

  void broadcast(ipc::Msg type, std::span<const std::byte> payload = {}) {
    for (std::uint32_t w = 0; w < size(); ++w)
      if (!ipc::send(fds_[w], type, payload)) fail("worker " + std::to_string(w) + " went away");
  }

  /// Waits for every worker; throws unless all exited with status 0.
  void join() {
    bool ok = reap();
    if (!ok) throw_error(ErrorCode::kWorkerFailure, "a worker exited abnormally");
  }

 private:
  [[noreturn]] void fail(const std::string& why) {
    for (auto pid : pids_) ::kill(pid, SIGKILL);
    reap();
    throw_error(ErrorCode::kWorkerFailure, why);
  }

  bool reap() {
    bool ok = true;
    for (auto pid : pids_) {
      int status = 0;
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ok = false;
    }
    reaped_ = true;
    return ok;
  }

  std::vector<pid_t> pids_;
  std::vector<int> fds_;
  bool reaped_ = false;
};

RunResult run_once(const BenchConfig& config, std::uint32_t repeat) {
  const auto run_root = config.root / config.tag() / ("rep-" + std::to_string(repeat));
  std::error_code ec;
  fs::remove_all(run_root, ec);
  if (config.backend == Backend::kObjStore) {
    ObjectStore::init(run_root, config.n_osd);
  } else {
    fs::create_directories(run_root, ec);
    if (ec) throw_error(ErrorCode::kIoError, "mkdir " + run_root.string() + ": " + ec.message());
  }

  const auto epoch = Clock::now();
  RunResult result;
  result.data_root = run_root;
  double compute_time = 0;
  {
    WorkerGroup group(config, run_root, epoch);
    const auto P = group.size();
    for (std::uint32_t phase = 0; phase < config.phases(); ++phase) {
      if (config.backend == Backend::kObjStore) {
        std::vector<std::byte> token;
        for (std::uint32_t w = 0; w < P; ++w) {
          auto m = group.recv(w);
          if (w == 0) token = std::move(m.payload);
        }
        group.broadcast(ipc::Msg::kToken, token);
        for (std::uint32_t w = 0; w < P; ++w) group.recv(w);  // kArrive
        group.broadcast(ipc::Msg::kRelease);
      } else {
        for (std::uint32_t w = 0; w < P; ++w) group.recv(w);  // kReady
        group.broadcast(ipc::Msg::kGo);
      }
    }
    for (std::uint32_t w = 0; w < P; ++w) {
      auto m = group.recv(w);
      double worker_compute = 0;
      if (m.type != ipc::Msg::kDone || !decode_records(m.payload, result.records, worker_compute))
        throw_error(ErrorCode::kWorkerFailure, "malformed record dump from worker " + std::to_string(w));
      compute_time = std::max(compute_time, worker_compute);
    }
    group.join();
  }

  std::stable_sort(result.records.begin(), result.records.end(), [](const OpRecord& a, const OpRecord& b) {
    return std::tie(a.phase, a.start, a.worker) < std::tie(b.phase, b.start, b.worker);
  });
  result.stats = aggregate(result.records, config.n_workers);
  result.stats.compute_time = compute_time;

  if (config.records_dir) {
    fs::create_directories(*config.records_dir, ec);
    std::ofstream out(*config.records_dir / (config.tag() + "-rep" + std::to_string(repeat) + ".csv"));
    write_records_csv(out, result.records);
    if (!out) throw_error(ErrorCode::kIoError, "writing records to " + config.records_dir->string());
  }
  if (!config.keep_data) fs::remove_all(run_root, ec);
  return result;
}

}  // namespace

std::vector<RunResult> run_benchmark(const BenchConfig& config) {
  config.validate();
  std::vector<RunResult> runs;
  runs.reserve(config.repeats);
  for (std::uint32_t r = 0; r < config.repeats; ++r) runs.push_back(run_once(config, r));
  return runs;
}

// ---- reporting ----------------------------------------------------------------

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return NAN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Summary summarize(const BenchConfig& config, const std::vector<RunStats>& runs) {
  Summary s;
  s.backend = std::string(backend_name(config.backend));
  s.workers = config.n_workers;
  s.chunk_rows = config.chunk_dims.empty() ? 0 : config.chunk_dims.front();
  s.chunk_cols = config.chunk_dims.size() < 2 ? 1 : config.chunk_dims.back();
  s.dtype = std::string(dtype_name(config.dtype));
  s.n_osd = config.backend == Backend::kObjStore ? config.n_osd : 0;
  s.procs_per_stripe = config.backend == Backend::kSharedFile ? config.procs_per_stripe : 0;
  s.repeats = static_cast<std::uint32_t>(runs.size());
  std::vector<double> bw, io, compute;
  for (const auto& r : runs) {
    bw.push_back(r.bandwidth_mib_s);
    io.push_back(r.total_io_time);
    compute.push_back(r.compute_time);
  }
  if (!bw.empty()) {
    s.bw_median_mib_s = median(bw);
    s.bw_min_mib_s = *std::min_element(bw.begin(), bw.end());
    s.bw_max_mib_s = *std::max_element(bw.begin(), bw.end());
  }
  s.io_time_mean_s = mean(io);
  s.compute_time_mean_s = mean(compute);
  return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<Summary>& rows, bool header) {
  if (header) os << kSummaryCsvHeader << '\n';
  for (const auto& s : rows) {
    os << s.backend << ',' << s.workers << ',' << s.chunk_rows << ',' << s.chunk_cols << ',' << s.dtype << ','
       << s.n_osd << ',' << s.procs_per_stripe << ',' << s.repeats << ',' << num(s.bw_median_mib_s) << ','
       << num(s.bw_min_mib_s) << ',' << num(s.bw_max_mib_s) << ',' << num(s.io_time_mean_s) << ','
       << num(s.compute_time_mean_s) << '\n';
  }
}

std::vector<Summary> read_summary_csv(std::istream& is) {
  std::vector<Summary> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kSummaryCsvHeader) continue;
    auto f = split_csv(line);
    if (f.size() != 13) throw_error(ErrorCode::kIoError, "summary csv line " + std::to_string(lineno) + ": expected 13 fields");
    try {
      Summary s;
      s.backend = f[0];
      s.workers = static_cast<std::uint32_t>(std::stoul(f[1]));
      s.chunk_rows = std::stoull(f[2]);
      s.chunk_cols = std::stoull(f[3]);
      s.dtype = f[4];
      s.n_osd = static_cast<std::uint32_t>(std::stoul(f[5]));
      s.procs_per_stripe = static_cast<std::uint32_t>(std::stoul(f[6]));
      s.repeats = static_cast<std::uint32_t>(std::stoul(f[7]));
      s.bw_median_mib_s = std::stod(f[8]);
      s.bw_min_mib_s = std::stod(f[9]);
      s.bw_max_mib_s = std::stod(f[10]);
      s.io_time_mean_s = std::stod(f[11]);
      s.compute_time_mean_s = std::stod(f[12]);
      rows.push_back(std::move(s));
    } catch (const std::logic_error&) {
      throw_error(ErrorCode::kIoError, "summary csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

void print_table(std::ostream& os, const std::vector<Summary>& rows) {
  auto flags = os.flags();
  os << std::left << std::setw(11) << "backend" << std::right << std::setw(8) << "workers" << std::setw(12) << "chunk"
     << std::setw(6) << "osds" << std::setw(6) << "pps" << std::setw(5) << "reps" << std::setw(12) << "bw_med" << std::setw(12)
     << "bw_min" << std::setw(12) << "bw_max" << std::setw(11) << "io_s" << std::setw(11) << "compute_s" << '\n';
  os << std::string(106, '-') << '\n';
  for (const auto& s : rows) {
    os << std::left << std::setw(11) << s.backend << std::right << std::setw(8) << s.workers << std::setw(12)
       << (std::to_string(s.chunk_rows) + "x" + std::to_string(s.chunk_cols)) << std::setw(6) << s.n_osd << std::setw(6)
       << s.procs_per_stripe << std::setw(5) << s.repeats << std::fixed << std::setprecision(2) << std::setw(12)
       << s.bw_median_mib_s << std::setw(12) << s.bw_min_mib_s << std::setw(12) << s.bw_max_mib_s
       << std::setprecision(4) << std::setw(11) << s.io_time_mean_s << std::setw(11) << s.compute_time_mean_s << '\n';
    os.flags(flags);
  }
  os.flags(flags);
}

Summary report(const BenchConfig& config, const std::vector<RunStats>& runs, ReportLevel level, std::ostream& csv,
               std::ostream& table) {
  auto s = summarize(config, runs);
  write_summary_csv(csv, {s});
  print_table(table, {s});
  if (level == ReportLevel::kPhases) {
    auto flags = table.flags();
    table << "\nrun  phase        bytes     span_s     bw_mib_s   max_worker_io_s\n";
    for (std::size_t r = 0; r < runs.size(); ++r)
      for (const auto& ph : runs[r].phases)
        table << std::setw(3) << r << std::setw(7) << ph.phase << std::setw(13) << ph.total_bytes << std::fixed
              << std::setprecision(6) << std::setw(11) << ph.io_span << std::setprecision(2) << std::setw(13)
              << ph.bandwidth_mib_s << std::setprecision(6) << std::setw(18) << ph.max_worker_io_time << '\n';
    table.flags(flags);
  }
  return s;
}

void write_records_csv(std::ostream& os, const std::vector<OpRecord>& records) {
  os << kRecordCsvHeader << '\n';
  for (const auto& r : records)
    os << r.worker << ',' << r.phase << ',' << op_name(r.kind) << ',' << r.bytes << ',' << num(r.start) << ','
       << num(r.duration) << '\n';
}

std::vector<OpRecord> read_records_csv(std::istream& is) {
  std::vector<OpRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kRecordCsvHeader) continue;
    auto f = split_csv(line);
    auto kind = f.size() == 6 ? parse_op(f[2]) : std::nullopt;
    if (!kind) throw_error(ErrorCode::kIoError, "records csv line " + std::to_string(lineno));
    try {
      out.push_back({static_cast<std::uint32_t>(std::stoul(f[0])), static_cast<std::uint32_t>(std::stoul(f[1])), *kind,
                     std::stoull(f[3]), std::stod(f[4]), std::stod(f[5])});
    } catch (const std::logic_error&) {
      throw_error(ErrorCode::kIoError, "records csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

}  // namespace objstore::bench
