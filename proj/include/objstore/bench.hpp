// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "objstore/object_model.hpp"
#include "objstore/shared_file.hpp"

namespace objstore::bench {

enum class Backend { kObjStore, kSharedFile };

std::string_view backend_name(Backend b);
std::optional<Backend> parse_backend(std::string_view s);

struct BenchConfig {
  Backend backend = Backend::kObjStore;
  std::uint32_t n_workers = 1;
  Dims chunk_dims{64, 4096};
  DType dtype = DType::kI32;
  std::uint32_t cycles = 200;
  std::uint32_t io_every = 5;
  std::uint32_t repeats = 5;
  std::uint32_t n_osd = 16;
  std::uint32_t procs_per_stripe = 32;
  /// Stencil passes over the worker's local field per compute cycle.
  std::uint32_t compute_units = 4;
  /// Parent of the per-repeat store roots / shared files.
  std::filesystem::path root;
  /// Keep each repeat's store / files instead of deleting them after the run.
  bool keep_data = false;
  /// Audit chunk completeness on commit. Off for measurement runs.
  bool verify_commit = false;
  LockMode lock_mode = LockMode::kFileRange;
  /// When set, one raw OpRecord CSV per repeat is written here.
  std::optional<std::filesystem::path> records_dir;

  std::uint32_t phases() const { return cycles / io_every; }
  /// Weak scaling: chunk_dims with the leading axis multiplied by n_workers.
  Shape phase_shape() const;
  std::uint64_t chunk_bytes() const;
  /// "<backend>-p<P>-c<rows>x<cols>"
  std::string tag() const;

  /// Throws kConfigInvalid.
  void validate() const;
};

/// OBJSTORE_EMU_ROOT if set, otherwise <tmp>/objstore-emu-bench.
std::filesystem::path default_bench_root();

enum class OpKind { kPutChunk, kCommit, kSharedWrite, kBarrier };

std::string_view op_name(OpKind k);
std::optional<OpKind> parse_op(std::string_view s);
constexpr bool is_data_op(OpKind k) { return k == OpKind::kPutChunk || k == OpKind::kSharedWrite; }

struct OpRecord {
  std::uint32_t worker = 0;
  std::uint32_t phase = 0;
  OpKind kind = OpKind::kPutChunk;
  std::uint64_t bytes = 0;
  double start = 0;     // seconds since the run epoch, monotonic clock
  double duration = 0;  // seconds

  double end() const { return start + duration; }
  friend bool operator==(const OpRecord&, const OpRecord&) = default;
};

struct PhaseStats {
  std::uint32_t phase = 0;
  std::uint64_t total_bytes = 0;
  double io_span = 0;  // max op end - min op start
  double bandwidth_mib_s = 0;
  std::vector<double> worker_io_time;  // indexed by worker
  double max_worker_io_time = 0;
};

struct RunStats {
  std::vector<PhaseStats> phases;
  std::uint64_t total_bytes = 0;
  double total_span = 0;
  /// Sum over phases of the slowest worker's io time in that phase.
  double total_io_time = 0;
  double bandwidth_mib_s = 0;  // total_bytes / total_span
  /// Slowest worker's summed compute-kernel time; filled in by run_benchmark.
  double compute_time = 0;
};

/// Span-based reduction of raw records. Phases must be numbered 0..K-1 and
/// every worker in [0, n_workers) must have a data op in every phase,
/// otherwise kIncompletePhase.
RunStats aggregate(const std::vector<OpRecord>& records, std::uint32_t n_workers);

struct RunResult {
  RunStats stats;
  std::vector<OpRecord> records;
  std::filesystem::path data_root;  // removed unless keep_data
};

/// Forks n_workers processes per repeat and drives the compute / I/O cycle
/// loop. Throws kConfigInvalid or kWorkerFailure.
std::vector<RunResult> run_benchmark(const BenchConfig& config);

/// Deterministic content of the full array for one phase. Element g (row-major
/// index) has a value that depends only on (phase, g).
ObjectData phase_array(const BenchConfig& config, std::uint32_t phase);
/// Worker w's row block of phase_array(config, phase).
ObjectData worker_block(const BenchConfig& config, std::uint32_t phase, std::uint32_t worker);

std::string phase_object_name(std::uint32_t phase);
std::filesystem::path phase_file_name(std::uint32_t phase);

// ---- reporting ---------------------------------------------------------

struct Summary {
  std::string backend;
  std::uint32_t workers = 0;
  std::uint64_t chunk_rows = 0;
  std::uint64_t chunk_cols = 0;
  std::string dtype;
  std::uint32_t n_osd = 0;             // 0 for the shared-file arm
  std::uint32_t procs_per_stripe = 0;  // 0 for the object-store arm
  std::uint32_t repeats = 0;
  double bw_median_mib_s = 0;
  double bw_min_mib_s = 0;
  double bw_max_mib_s = 0;
  double io_time_mean_s = 0;
  double compute_time_mean_s = 0;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "backend,workers,chunk_rows,chunk_cols,dtype,n_osd,procs_per_stripe,repeats,"
    "bw_median_mib_s,bw_min_mib_s,bw_max_mib_s,io_time_mean_s,compute_time_mean_s";

inline constexpr std::string_view kRecordCsvHeader = "worker,phase,op,bytes,start_s,duration_s";

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

/// Median/min/max of run bandwidth and mean io/compute time over the runs.
Summary summarize(const BenchConfig& config, const std::vector<RunStats>& runs);

enum class ReportLevel { kSummary, kPhases };

void write_summary_csv(std::ostream& os, const std::vector<Summary>& rows, bool header = true);
std::vector<Summary> read_summary_csv(std::istream& is);
void print_table(std::ostream& os, const std::vector<Summary>& rows);

/// Emits the CSV row for these runs and the ASCII table; kPhases adds one
/// line per phase of every run to the table output.
Summary report(const BenchConfig& config, const std::vector<RunStats>& runs, ReportLevel level,
               std::ostream& csv, std::ostream& table);

void write_records_csv(std::ostream& os, const std::vector<OpRecord>& records);
std::vector<OpRecord> read_records_csv(std::istream& is);

}  // namespace objstore::bench
