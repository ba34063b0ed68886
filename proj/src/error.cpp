// SPDX-License-Identifier: Apache-2.0

#include "objstore/error.hpp"

#include <cerrno>
#include <cstring>

namespace objstore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRankMismatch: return "rank mismatch";
    case ErrorCode::kNonDivisibleChunk: return "chunk does not divide shape";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kTruncatedRecord: return "truncated record";
    case ErrorCode::kInvariantViolation: return "invariant violation";
    case ErrorCode::kAlreadyInitialized: return "already initialized";
    case ErrorCode::kLayoutMismatch: return "store layout mismatch";
    case ErrorCode::kIoError: return "i/o error";
    case ErrorCode::kChunkExists: return "chunk exists";
    case ErrorCode::kChunkNotFound: return "chunk not found";
    case ErrorCode::kCorruptChunk: return "corrupt chunk";
    case ErrorCode::kObjectNotFound: return "object not found";
    case ErrorCode::kCorruptMetadata: return "corrupt metadata";
    case ErrorCode::kAlreadyCommitted: return "already committed";
    case ErrorCode::kMissingChunks: return "missing chunks";
    case ErrorCode::kPartOutOfRange: return "part out of range";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kIncompletePhase: return "incomplete phase";
    case ErrorCode::kWorkerFailure: return "worker failure";
    case ErrorCode::kConfigInvalid: return "invalid configuration";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

void throw_error(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  throw Error(code, msg);
}

void throw_errno(const std::string& what) {
  const int err = errno;
  throw_error(ErrorCode::kIoError, what + ": " + std::strerror(err));
}

}  // namespace objstore
