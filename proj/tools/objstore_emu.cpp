// SPDX-License-Identifier: Apache-2.0
//
// objstore-emu: manage an emulated object store and run the weak-scaling
// comparison against the locked shared-file baseline.
//
// Exit codes: 0 success, 1 domain error (not found, corrupt, ...), 2 usage.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "objstore/bench.hpp"
#include "objstore/client.hpp"
#include "objstore/error.hpp"

namespace fs = std::filesystem;
using namespace objstore;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Dims dims_arg(const std::string& text, const char* flag) {
  auto d = parse_dims(text);
  if (!d) throw UsageError(std::string(flag) + ": expected dimensions like 64x4096, got '" + text + "'");
  return *d;
}

DType dtype_arg(const std::string& text) {
  auto t = parse_dtype(text);
  if (!t) throw UsageError("--dtype: expected i32, f32 or f64, got '" + text + "'");
  return *t;
}

fs::path store_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OBJSTORE_EMU_ROOT"); env && *env) return env;
  throw UsageError("--root is required (or set OBJSTORE_EMU_ROOT)");
}

std::vector<std::byte> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + p.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(buf.size());
  std::memcpy(out.data(), buf.data(), buf.size());
  return out;
}

void write_file(const fs::path& p, std::span<const std::byte> bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
}

void print_stat(const ObjectStore& store, const ObjectMeta& meta) {
  const auto grid = meta.layout();
  std::cout << "name: " << meta.name << '\n'
            << "id: " << meta.id.hex() << '\n'
            << "dtype: " << dtype_name(meta.dtype) << '\n'
            << "shape: " << format_dims(meta.shape.dims()) << '\n'
            << "bytes: " << meta.byte_size() << '\n'
            << "chunked: " << (meta.chunked() ? "yes" : "no") << '\n';
  if (meta.chunked())
    std::cout << "chunk: " << format_dims(grid.chunk_dims) << '\n' << "grid: " << format_dims(grid.grid_dims) << '\n';
  std::cout << "chunk_count: " << grid.chunk_count << '\n' << "chunks:\n";
  for (std::uint64_t p = 0; p < grid.chunk_count; ++p) {
    const auto part = static_cast<std::uint32_t>(p);
    std::cout << "  " << p << " osd-" << osd_index(meta.id, part, store.osds().n_osd()) << ' '
              << store.chunk_location(meta, p).string()
              << (store.osds().chunk_exists(meta.id, part) ? "" : " MISSING") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filesystem-backed object store emulator and parallel I/O benchmark"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string root_flag;
  app.add_option("--root", root_flag, "Store root (default: $OBJSTORE_EMU_ROOT)");

  auto* init = app.add_subcommand("init", "Create a store with N emulated OSDs");
  std::uint32_t init_osds = 4;
  init->add_option("--osds", init_osds, "Number of OSD directories")->check(CLI::PositiveNumber);

  auto* put = app.add_subcommand("put", "Store a raw little-endian array file under NAME");
  std::string put_name, put_file, put_dtype = "i32", put_dims, put_chunk;
  put->add_option("NAME", put_name)->required();
  put->add_option("FILE", put_file)->required();
  put->add_option("--dtype", put_dtype, "i32, f32 or f64");
  put->add_option("--dims", put_dims, "Array shape, e.g. 256x4096")->required();
  put->add_option("--chunk", put_chunk, "Chunk shape, e.g. 64x4096");

  auto* get = app.add_subcommand("get", "Write the current version of NAME to FILE");
  std::string get_name, get_file;
  get->add_option("NAME", get_name)->required();
  get->add_option("FILE", get_file)->required();

  auto* stat = app.add_subcommand("stat", "Show metadata and resolved chunk locations");
  std::string stat_name;
  stat->add_option("NAME", stat_name)->required();

  auto* ls = app.add_subcommand("ls", "List committed object names");

  auto* audit = app.add_subcommand("audit", "Check placement and chunk integrity");
  std::string audit_snapshot, audit_against;
  audit->add_option("--snapshot", audit_snapshot, "Write chunk digests to FILE");
  audit->add_option("--against", audit_against, "Verify chunks recorded in FILE are unchanged");

  auto* bench = app.add_subcommand("bench", "Run the compute / I/O skeleton benchmark");
  bench::BenchConfig cfg;
  std::string bench_backend = "objstore", bench_chunk = "64x4096", bench_out, bench_records, bench_dtype = "i32";
  bool bench_keep = false, bench_phases = false, bench_inproc = false;
  bench->add_option("--backend", bench_backend, "objstore or sharedfile");
  bench->add_option("--workers", cfg.n_workers, "Worker processes")->check(CLI::PositiveNumber);
  bench->add_option("--chunk", bench_chunk, "Per-worker chunk, e.g. 64x4096");
  bench->add_option("--dtype", bench_dtype, "i32, f32 or f64");
  bench->add_option("--cycles", cfg.cycles, "Compute cycles per run");
  bench->add_option("--io-every", cfg.io_every, "Cycles between I/O phases");
  bench->add_option("--repeats", cfg.repeats, "Runs per configuration");
  auto* osds_opt = bench->add_option("--osds", cfg.n_osd, "OSD count (objstore)");
  auto* pps_opt = bench->add_option("--procs-per-stripe", cfg.procs_per_stripe, "Writers per stripe (sharedfile)");
  osds_opt->excludes(pps_opt);
  bench->add_option("--compute-units", cfg.compute_units, "Stencil passes per cycle");
  bench->add_option("--out", bench_out, "Summary CSV path");
  bench->add_option("--records-dir", bench_records, "Directory for raw per-run op records");
  bench->add_flag("--keep", bench_keep, "Keep per-repeat stores and files");
  bench->add_flag("--phases", bench_phases, "Print per-phase statistics");
  bench->add_flag("--verify-commit", cfg.verify_commit, "Audit chunk completeness before each commit");
  bench->add_flag("--in-process-locks", bench_inproc, "Stripe mutexes instead of file range locks");

  auto* report = app.add_subcommand("report", "Render summary CSV files as a table");
  std::vector<std::string> report_files;
  report->add_option("CSV", report_files)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "objstore-emu: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*init) {
      auto root = store_root(root_flag);
      auto store = ObjectStore::init(root, init_osds);
      std::cout << "initialized " << root.string() << " with " << store.osds().n_osd() << " OSDs\n";
    } else if (*put) {
      auto store = ObjectStore::open(store_root(root_flag));
      const auto dtype = dtype_arg(put_dtype);
      Shape shape(dims_arg(put_dims, "--dims"));
      ObjectData data(dtype, shape, read_file(put_file));
      if (put_chunk.empty()) {
        auto id = store.put(put_name, data);
        std::cout << id.hex() << '\n';
      } else {
        auto session = store.begin_chunked_put(put_name, dtype, shape, dims_arg(put_chunk, "--chunk"));
        const auto token = session.token();
        Shape chunk_shape(token.grid.chunk_dims);
        for (std::uint64_t p = 0; p < token.grid.chunk_count; ++p) {
          auto bytes = extract_chunk(token.grid, shape, elem_size(dtype), p, data.payload);
          store.put_chunk(token, p, ObjectData(dtype, chunk_shape, std::move(bytes)));
        }
        store.commit(session);
        std::cout << token.id.hex() << '\n';
      }
    } else if (*get) {
      auto store = ObjectStore::open(store_root(root_flag));
      auto [meta, data] = store.get(get_name);
      write_file(get_file, data.payload);
    } else if (*stat) {
      auto store = ObjectStore::open(store_root(root_flag));
      print_stat(store, store.stat(stat_name));
    } else if (*ls) {
      auto store = ObjectStore::open(store_root(root_flag));
      auto names = store.list();
      std::sort(names.begin(), names.end());
      for (const auto& n : names) std::cout << n << '\n';
    } else if (*audit) {
      auto store = ObjectStore::open(store_root(root_flag));
      auto rep = audit_store(store.osds());
      std::cout << "chunks: " << rep.chunks << "\ntemp files: " << rep.temp_files << '\n';
      for (const auto& p : rep.misplaced) std::cout << "misplaced: " << p.string() << '\n';
      for (const auto& p : rep.corrupt) std::cout << "corrupt: " << p.string() << '\n';
      for (const auto& p : rep.stray) std::cout << "stray: " << p.string() << '\n';
      bool clean = rep.clean();
      const auto digests = digest_chunks(store.osds());
      if (!audit_snapshot.empty()) {
        std::ofstream out(audit_snapshot);
        for (const auto& [name, d] : digests) out << name << ' ' << d << '\n';
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + audit_snapshot);
      }
      if (!audit_against.empty()) {
        std::ifstream in(audit_against);
        if (!in) throw Error(ErrorCode::kIoError, "cannot read " + audit_against);
        ChunkDigests before;
        std::string name;
        std::uint64_t d = 0;
        while (in >> name >> d) before[name] = d;
        auto diff = compare_digests(before, digests);
        for (const auto& n : diff.changed) std::cout << "changed: " << n << '\n';
        for (const auto& n : diff.missing) std::cout << "missing: " << n << '\n';
        clean = clean && diff.clean();
      }
      std::cout << (clean ? "audit: clean\n" : "audit: FAILED\n");
      return clean ? 0 : 1;
    } else if (*bench) {
      auto backend = bench::parse_backend(bench_backend);
      if (!backend) throw UsageError("--backend: expected objstore or sharedfile");
      cfg.backend = *backend;
      cfg.chunk_dims = dims_arg(bench_chunk, "--chunk");
      cfg.dtype = dtype_arg(bench_dtype);
      cfg.keep_data = bench_keep;
      cfg.lock_mode = bench_inproc ? LockMode::kInProcess : LockMode::kFileRange;
      cfg.root = root_flag.empty() ? bench::default_bench_root() : fs::path(root_flag);
      if (!bench_records.empty()) cfg.records_dir = fs::path(bench_records);
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }

      auto runs = bench::run_benchmark(cfg);
      std::vector<bench::RunStats> stats;
      for (auto& r : runs) stats.push_back(std::move(r.stats));
      std::ostringstream csv;
      bench::report(cfg, stats, bench_phases ? bench::ReportLevel::kPhases : bench::ReportLevel::kSummary, csv,
                    std::cout);
      if (!bench_out.empty()) {
        std::ofstream out(bench_out);
        out << csv.str();
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + bench_out);
      }
    } else if (*report) {
      std::vector<bench::Summary> rows;
      for (const auto& f : report_files) {
        std::ifstream in(f);
        if (!in) throw Error(ErrorCode::kIoError, "cannot read " + f);
        auto part = bench::read_summary_csv(in);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      bench::print_table(std::cout, rows);
    }
  } catch (const UsageError& e) {
    std::cerr << "objstore-emu: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "objstore-emu: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "objstore-emu: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
