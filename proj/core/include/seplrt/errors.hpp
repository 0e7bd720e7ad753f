#pragma once

#include <stdexcept>
#include <string>

namespace seplrt {

// Base class for all library errors. `kind()` is a stable machine-readable
// tag used by the CLI when emitting structured error reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

// numerics
struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& m) : Error("not_positive_definite", m) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& m) : Error("dimension_mismatch", m) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain_error", m) {}
};

// data
struct MissingColumn : Error {
  explicit MissingColumn(const std::string& m) : Error("missing_column", m) {}
};
struct NonNumericCell : Error {
  explicit NonNumericCell(const std::string& m) : Error("non_numeric_cell", m) {}
};
struct DuplicateObservation : Error {
  explicit DuplicateObservation(const std::string& m) : Error("duplicate_observation", m) {}
};
struct EmptyDataset : Error {
  explicit EmptyDataset(const std::string& m) : Error("empty_dataset", m) {}
};
struct RaggedSubject : Error {
  explicit RaggedSubject(const std::string& m) : Error("ragged_subject", m) {}
};
struct DataError : Error {
  DataError(const std::string& kind, const std::string& m) : Error(kind, m) {}
};
struct DegenerateFactor : Error {
  explicit DegenerateFactor(const std::string& m) : Error("degenerate_factor", m) {}
};

// lear
struct NegativeDistance : Error {
  explicit NegativeDistance(const std::string& m) : Error("negative_distance", m) {}
};

// fitting
struct SingularNormalEquations : Error {
  explicit SingularNormalEquations(const std::string& m) : Error("singular_normal_equations", m) {}
};
struct DegenerateResiduals : Error {
  explicit DegenerateResiduals(const std::string& m) : Error("degenerate_residuals", m) {}
};
struct AllStartsInadmissible : Error {
  explicit AllStartsInadmissible(const std::string& m) : Error("all_starts_inadmissible", m) {}
};
struct UnidentifiedCell : Error {
  UnidentifiedCell(int time_idx, int loc_idx, const std::string& m)
      : Error("unidentified_cell", m), time_idx(time_idx), loc_idx(loc_idx) {}
  int time_idx;
  int loc_idx;
};

// testing / study
struct FitNotConverged : Error {
  explicit FitNotConverged(const std::string& m) : Error("fit_not_converged", m) {}
};
struct NonPositiveDf : Error {
  explicit NonPositiveDf(const std::string& m) : Error("non_positive_df", m) {}
};
struct StudyAborted : Error {
  explicit StudyAborted(const std::string& m) : Error("study_aborted", m) {}
};

}  // namespace seplrt
