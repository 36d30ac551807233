#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hodd/analysis.hpp"
#include "manifest.hpp"

namespace ddtool {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A schedule named by a short source string:
///   table-s1:K     published lengths for order K
///   generated:K    optimizer output (default settings)
///   qdd:K          quadratic DD of order K
///   udd:N          Uhrig sequence with N X pulses
///   xy4            equal-spaced X, Z traversal with 4 segments
///   periodic:L     equal-spaced X, Z traversal with L segments
///   file:PATH      schedule JSON, relative paths resolved against `base`
struct ResolvedSequence {
  hodd::NamedSchedule named;
  /// Published lengths when the source is table-s1, used for digit truncation.
  std::optional<std::vector<double>> nominal_intervals;
};

/// Throws ConfigError on unknown sources, NumericalError if the optimizer does
/// not converge. File inputs are appended to `inputs` with their digests.
ResolvedSequence resolve_sequence(std::string_view source, const std::filesystem::path& base,
                                  std::vector<FileDigest>* inputs = nullptr);

}  // namespace ddtool
