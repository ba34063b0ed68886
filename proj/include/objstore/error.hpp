// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace objstore {

enum class ErrorCode {
  kRankMismatch,
  kNonDivisibleChunk,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedRecord,
  kInvariantViolation,
  kAlreadyInitialized,
  kLayoutMismatch,
  kIoError,
  kChunkExists,
  kChunkNotFound,
  kCorruptChunk,
  kObjectNotFound,
  kCorruptMetadata,
  kAlreadyCommitted,
  kMissingChunks,
  kPartOutOfRange,
  kShapeMismatch,
  kIncompletePhase,
  kWorkerFailure,
  kConfigInvalid,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (and the CLI exit-code contract) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void throw_error(ErrorCode code, const std::string& detail);

/// Throws kIoError with strerror(errno) appended.
[[noreturn]] void throw_errno(const std::string& what);

}  // namespace objstore
