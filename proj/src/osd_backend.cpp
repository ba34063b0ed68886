// SPDX-License-Identifier: Apache-2.0

#include "objstore/osd_backend.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>

#include "byte_io.hpp"
#include "fs_util.hpp"
#include "objstore/error.hpp"

namespace fs = std::filesystem;

namespace objstore {

using detail::UniqueFd;

// ---- OBJC header ----------------------------------------------------------

std::vector<std::byte> encode_chunk_header(const ChunkHeader& h) {
  detail::ByteWriter w(chunk_header_size(h.chunk_dims.size()));
  w.bytes(kChunkMagic.data(), kChunkMagic.size());
  w.u16(kChunkVersion);
  w.u8(static_cast<std::uint8_t>(h.dtype));
  w.u8(static_cast<std::uint8_t>(h.chunk_dims.size()));
  w.u32(h.part);
  w.u32(0);
  w.bytes(h.id.bytes().data(), 16);
  for (auto d : h.chunk_dims) w.u64(d);
  return w.take();
}

ChunkHeader decode_chunk_header(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes);
  std::array<char, 4> magic{};
  std::uint16_t version = 0;
  std::uint8_t code = 0, rank = 0;
  std::uint32_t reserved = 0;
  ChunkHeader h;
  ObjectId::Bytes idb{};
  if (!r.bytes(magic.data(), 4) || !r.u16(version) || !r.u8(code) || !r.u8(rank) || !r.u32(h.part) ||
      !r.u32(reserved) || !r.bytes(idb.data(), 16))
    throw_error(ErrorCode::kCorruptChunk, "short header");
  if (magic != kChunkMagic) throw_error(ErrorCode::kCorruptChunk, "bad magic");
  if (version != kChunkVersion) throw_error(ErrorCode::kCorruptChunk, "version " + std::to_string(version));
  auto dtype = dtype_from_code(code);
  if (!dtype || rank == 0 || reserved != 0) throw_error(ErrorCode::kCorruptChunk, "bad dtype, rank or reserved field");
  h.dtype = *dtype;
  h.id = ObjectId(idb);
  h.chunk_dims.resize(rank);
  for (auto& d : h.chunk_dims)
    if (!r.u64(d)) throw_error(ErrorCode::kCorruptChunk, "short header");
  return h;
}

// ---- store layout -----------------------------------------------------------

std::string marker_line(std::uint32_t n_osd) { return "objstore-emu v1 n_osd=" + std::to_string(n_osd) + "\n"; }

namespace {

std::optional<std::uint32_t> read_marker(const fs::path& root) {
  auto bytes = detail::read_file_if_exists(root / kMarkerFile);
  if (!bytes) return std::nullopt;
  std::string_view text(reinterpret_cast<const char*>(bytes->data()), bytes->size());
  constexpr std::string_view kPrefix = "objstore-emu v1 n_osd=";
  if (!text.starts_with(kPrefix)) throw_error(ErrorCode::kIoError, "unrecognized marker in " + root.string());
  text.remove_prefix(kPrefix.size());
  if (text.ends_with('\n')) text.remove_suffix(1);
  std::uint32_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0)
    throw_error(ErrorCode::kIoError, "malformed marker in " + root.string());
  return n;
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw_error(ErrorCode::kIoError, "mkdir " + p.string() + ": " + ec.message());
}

}  // namespace

OsdStore OsdStore::init(const fs::path& root, std::uint32_t n_osd) {
  if (n_osd == 0) throw_error(ErrorCode::kConfigInvalid, "n_osd must be >= 1");
  if (auto existing = read_marker(root)) {
    if (*existing != n_osd)
      throw_error(ErrorCode::kAlreadyInitialized,
                  root.string() + " has n_osd=" + std::to_string(*existing) + ", requested " + std::to_string(n_osd));
    return open(root, n_osd);
  }
  std::error_code ec;
  if (fs::exists(root, ec) && !fs::is_empty(root, ec))
    throw_error(ErrorCode::kIoError, root.string() + " is not empty and not an object store");

  make_dir(root);
  make_dir(root / kMetaDir);
  for (std::uint32_t k = 0; k < n_osd; ++k) make_dir(root / ("osd-" + std::to_string(k)));

  // The marker goes last: a root with a marker always has its full tree.
  auto line = marker_line(n_osd);
  auto tmp = detail::write_temp_file(root, {detail::as_bytes(line)});
  if (::rename(tmp.c_str(), (root / kMarkerFile).c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw_errno("rename marker");
  }
  detail::fsync_dir(root);
  return OsdStore(root, n_osd);
}

OsdStore OsdStore::open(const fs::path& root, std::uint32_t expected_n_osd) {
  auto n = read_marker(root);
  if (!n) throw_error(ErrorCode::kIoError, root.string() + " is not an object store (no marker)");
  if (expected_n_osd != 0 && *n != expected_n_osd)
    throw_error(ErrorCode::kLayoutMismatch,
                "store has n_osd=" + std::to_string(*n) + ", expected " + std::to_string(expected_n_osd));
  OsdStore s(root, *n);
  std::error_code ec;
  if (!fs::is_directory(s.meta_dir(), ec)) throw_error(ErrorCode::kIoError, "missing " + s.meta_dir().string());
  for (std::uint32_t k = 0; k < *n; ++k)
    if (!fs::is_directory(s.osd_dir(k), ec)) throw_error(ErrorCode::kIoError, "missing " + s.osd_dir(k).string());
  return s;
}

fs::path OsdStore::osd_dir(std::uint32_t index) const { return root_ / ("osd-" + std::to_string(index)); }

fs::path OsdStore::chunk_path(const ObjectId& id, std::uint32_t part) const {
  return osd_dir(osd_index(id, part, n_osd_)) / chunk_filename(id, part);
}

bool OsdStore::chunk_exists(const ObjectId& id, std::uint32_t part) const {
  return ::access(chunk_path(id, part).c_str(), F_OK) == 0;
}

std::uint64_t OsdStore::write_chunk(const ObjectId& id, std::uint32_t part, const ObjectData& data) const {
  if (!data.valid()) throw_error(ErrorCode::kShapeMismatch, "payload length does not match chunk shape");
  const auto dir = osd_dir(osd_index(id, part, n_osd_));
  const auto final_path = dir / chunk_filename(id, part);
  if (::access(final_path.c_str(), F_OK) == 0) throw_error(ErrorCode::kChunkExists, final_path.string());

  auto header = encode_chunk_header({data.dtype, part, id, data.shape.dims()});
  auto tmp = detail::write_temp_file(dir, {header, data.payload});
  // link() refuses to replace an existing name, so a racing second writer
  // loses cleanly instead of overwriting an immutable chunk.
  if (::link(tmp.c_str(), final_path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    if (err == EEXIST) throw_error(ErrorCode::kChunkExists, final_path.string());
    errno = err;
    throw_errno("publish " + final_path.string());
  }
  ::unlink(tmp.c_str());
  detail::fsync_dir(dir);
  return header.size() + data.payload.size();
}

namespace {

ObjectData read_chunk_file(const fs::path& path, const ObjectId& id, std::uint32_t part) {
  UniqueFd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (!fd) {
    if (errno == ENOENT) throw_error(ErrorCode::kChunkNotFound, path.string());
    throw_errno("open " + path.string());
  }
  struct stat st {};
  if (::fstat(fd.get(), &st) != 0) throw_errno("stat " + path.string());
  const auto size = static_cast<std::uint64_t>(st.st_size);

  std::array<std::byte, kChunkFixedBytes> fixed{};
  if (size < fixed.size()) throw_error(ErrorCode::kCorruptChunk, "short file " + path.string());
  detail::pread_all(fd.get(), fixed, 0, path.string());
  const auto rank = std::to_integer<std::size_t>(fixed[7]);
  const auto hsize = chunk_header_size(rank);
  if (size < hsize) throw_error(ErrorCode::kCorruptChunk, "short header " + path.string());
  std::vector<std::byte> hbytes(hsize);
  detail::pread_all(fd.get(), hbytes, 0, path.string());
  auto h = decode_chunk_header(hbytes);
  if (h.id != id || h.part != part) throw_error(ErrorCode::kCorruptChunk, "header names another chunk: " + path.string());

  Shape shape;
  try {
    shape = Shape(h.chunk_dims);
  } catch (const Error&) {
    throw_error(ErrorCode::kCorruptChunk, "bad chunk dims in " + path.string());
  }
  const auto payload_bytes = shape.element_count() * elem_size(h.dtype);
  if (size != hsize + payload_bytes)
    throw_error(ErrorCode::kCorruptChunk, "length " + std::to_string(size) + " != " +
                                              std::to_string(hsize + payload_bytes) + " for " + path.string());
  std::vector<std::byte> payload(payload_bytes);
  detail::pread_all(fd.get(), payload, hsize, path.string());
  return ObjectData(h.dtype, std::move(shape), std::move(payload));
}

}  // namespace

ObjectData OsdStore::read_chunk(const ObjectId& id, std::uint32_t part) const {
  return read_chunk_file(chunk_path(id, part), id, part);
}

// ---- audit ----------------------------------------------------------------

AuditReport audit_store(const OsdStore& store) {
  AuditReport rep;
  for (std::uint32_t k = 0; k < store.n_osd(); ++k) {
    for (const auto& entry : fs::directory_iterator(store.osd_dir(k))) {
      const auto name = entry.path().filename().string();
      if (name.starts_with(".tmp-")) {
        ++rep.temp_files;
        continue;
      }
      auto parsed = parse_chunk_filename(name);
      if (!parsed || !entry.is_regular_file()) {
        rep.stray.push_back(entry.path());
        continue;
      }
      ++rep.chunks;
      if (osd_index(parsed->id, parsed->part, store.n_osd()) != k) rep.misplaced.push_back(entry.path());
      try {
        read_chunk_file(entry.path(), parsed->id, parsed->part);
      } catch (const Error&) {
        rep.corrupt.push_back(entry.path());
      }
    }
  }
  return rep;
}

ChunkDigests digest_chunks(const OsdStore& store) {
  ChunkDigests out;
  for (std::uint32_t k = 0; k < store.n_osd(); ++k) {
    for (const auto& entry : fs::directory_iterator(store.osd_dir(k))) {
      const auto name = entry.path().filename().string();
      if (!parse_chunk_filename(name)) continue;
      auto bytes = detail::read_file_if_exists(entry.path());
      if (!bytes) continue;
      out["osd-" + std::to_string(k) + "/" + name] = fnv1a64(std::span<const std::byte>(*bytes));
    }
  }
  return out;
}

DigestDiff compare_digests(const ChunkDigests& before, const ChunkDigests& after) {
  DigestDiff d;
  for (const auto& [name, digest] : before) {
    auto it = after.find(name);
    if (it == after.end())
      d.missing.push_back(name);
    else if (it->second != digest)
      d.changed.push_back(name);
  }
  return d;
}

}  // namespace objstore
