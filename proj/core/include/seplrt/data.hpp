#pragma once

#include <string>
#include <vector>

#include "seplrt/numerics.hpp"

namespace seplrt {

// One subject's block of an unbalanced multivariate repeated measures
// dataset. Observations are stored time-major: observation (j, l) sits at
// position j * s + l of y, matching the Kronecker block layout of the
// temporal-by-spatial covariance.
struct SubjectData {
  std::string id;
  Vector y;                       // t*s responses, time-major
  Matrix x;                       // (t*s) x p design rows, same order as y
  Vector times;                   // t strictly increasing measurement times
  std::vector<int> time_grid_idx; // indices into the maximal temporal grid
  Matrix locs;                    // s x q spatial coordinates
  std::vector<int> loc_grid_idx;  // indices into the maximal spatial grid

  int t() const { return static_cast<int>(times.size()); }
  int s() const { return static_cast<int>(locs.rows()); }
  int obs() const { return t() * s(); }
};

struct Dataset {
  std::vector<SubjectData> subjects;
  int p = 0;                       // fixed-effect count
  int t_max = 0;                   // maximal temporal grid size
  int s_max = 0;                   // maximal spatial grid size
  Vector grid_times;               // t_max sorted grid times
  std::vector<double> grid_loc_ids;// s_max sorted location ids
  Matrix grid_locs;                // s_max x q coordinates, one row per id
  std::vector<std::string> design_names;
  std::vector<std::string> covariate_names;
  std::vector<std::string> coord_names;
  std::vector<std::string> warnings;

  int n_subjects() const { return static_cast<int>(subjects.size()); }
  long n_obs() const {
    long n = 0;
    for (const auto& s : subjects) n += s.obs();
    return n;
  }
  int max_ts() const {
    int m = 0;
    for (const auto& s : subjects) m = std::max(m, s.obs());
    return m;
  }
};

// Minimum and maximum pairwise within-subject distance over all subjects,
// for one repeated factor. These are the scaling constants of the LEAR
// exponent.
struct DistanceScale {
  double d_min = 0.0;
  double d_max = 0.0;
  double range() const { return d_max - d_min; }
};

enum class Factor { temporal, spatial };

struct CsvOptions {
  bool intercept = true;
  // Explicit covariate column selection; empty means every column that is
  // not subject/y/time/loc/loc_* is used, in header order.
  std::vector<std::string> covariates;
};

// Strict CSV reader for the canonical layout:
//   subject,y,time,loc,loc_x[,loc_y,...][,covariate...]
// Header row required, '.' decimal point, no quoting, no missing cells.
// Each subject must observe a complete times-by-locations sub-grid.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

// Inverse of load_csv for round-tripping; numbers are written in shortest
// exact form so a reload reproduces identical values.
void write_csv(const Dataset& dataset, const std::string& path);

DistanceScale distance_scale(const Dataset& dataset, Factor factor);

// y - X beta for one subject.
Vector residuals(const SubjectData& subject, const Vector& beta);

// Pairwise distance matrices used to build the LEAR factor correlations.
Matrix time_dist(const SubjectData& subject);
Matrix loc_dist(const SubjectData& subject);

}  // namespace seplrt
