#include "anacp/error.hpp"

namespace anacp {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::bad_magic: return "BadMagic";
    case Errc::truncated_file: return "TruncatedFile";
    case Errc::label_out_of_range: return "LabelOutOfRange";
    case Errc::too_many_tasks: return "TooManyTasks";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::eig_decomposition_failure: return "EigDecompositionFailure";
    case Errc::singular_system: return "SingularSystem";
    case Errc::shrinking_targets: return "ShrinkingTargets";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::non_orthonormal_basis: return "NonOrthonormalBasis";
    case Errc::too_few_classes: return "TooFewClasses";
    case Errc::stats_out_of_sync: return "StatsOutOfSync";
    case Errc::not_fitted: return "NotFitted";
    case Errc::unknown_class: return "UnknownClass";
    case Errc::repeated_class: return "RepeatedClass";
    case Errc::unknown_task: return "UnknownTask";
    case Errc::degenerate_baseline: return "DegenerateBaseline";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
    case Errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace anacp
