#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lyapvec {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kBlowUp,
  kRankCollapse,
  kSingularSystem,
  kMisaligned,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` is what the CLI reports as the machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lyapvec
