#include "lyapvec/error.hpp"

namespace lyapvec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kBlowUp: return "blow_up";
    case ErrorCode::kRankCollapse: return "rank_collapse";
    case ErrorCode::kSingularSystem: return "singular_system";
    case ErrorCode::kMisaligned: return "misaligned";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace lyapvec
