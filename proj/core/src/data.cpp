#include "seplrt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace seplrt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& cell, long line_no, const std::string& col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty())
    throw NonNumericCell("non-numeric cell '" + cell + "' at line " +
                         std::to_string(line_no) + ", column '" + col + "'");
  if (!std::isfinite(v))
    throw NonNumericCell("non-finite cell at line " + std::to_string(line_no) +
                         ", column '" + col + "'");
  return v;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct RawRow {
  long line_no;
  double y;
  double time;
  double loc;
  std::vector<double> coords;
  std::vector<double> covs;
};

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("file_not_found", "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw EmptyDataset("'" + path + "' is empty");
  const std::vector<std::string> header = split_line(line);

  auto col_index = [&](const std::string& name) -> int {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  auto require = [&](const std::string& name) -> int {
    int i = col_index(name);
    if (i < 0) throw MissingColumn("required column '" + name + "' not found in '" + path + "'");
    return i;
  };

  const int c_subject = require("subject");
  const int c_y = require("y");
  const int c_time = require("time");
  const int c_loc = require("loc");

  std::vector<int> c_coords;
  std::vector<std::string> coord_names;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("loc_", 0) == 0) {
      c_coords.push_back(static_cast<int>(i));
      coord_names.push_back(header[i]);
    }
  }
  if (c_coords.empty()) throw MissingColumn("no coordinate column (loc_x, ...) found in '" + path + "'");

  std::vector<int> c_covs;
  std::vector<std::string> cov_names;
  if (options.covariates.empty()) {
    std::set<int> taken{c_subject, c_y, c_time, c_loc};
    taken.insert(c_coords.begin(), c_coords.end());
    for (size_t i = 0; i < header.size(); ++i) {
      if (!taken.count(static_cast<int>(i))) {
        c_covs.push_back(static_cast<int>(i));
        cov_names.push_back(header[i]);
      }
    }
  } else {
    for (const auto& name : options.covariates) {
      c_covs.push_back(require(name));
      cov_names.push_back(name);
    }
  }
  if (!options.intercept && c_covs.empty())
    throw DataError("empty_design", "no intercept and no covariate columns: the design is empty");

  // read rows grouped by subject, keeping first-appearance order
  std::vector<std::string> subject_order;
  std::map<std::string, std::vector<RawRow>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError("malformed_row", "line " + std::to_string(line_no) + " has " +
                                           std::to_string(cells.size()) + " cells, expected " +
                                           std::to_string(header.size()));
    RawRow r;
    r.line_no = line_no;
    const std::string& id = cells[c_subject];
    r.y = parse_number(cells[c_y], line_no, "y");
    r.time = parse_number(cells[c_time], line_no, "time");
    r.loc = parse_number(cells[c_loc], line_no, "loc");
    for (size_t k = 0; k < c_coords.size(); ++k)
      r.coords.push_back(parse_number(cells[c_coords[k]], line_no, coord_names[k]));
    for (size_t k = 0; k < c_covs.size(); ++k)
      r.covs.push_back(parse_number(cells[c_covs[k]], line_no, cov_names[k]));
    if (!rows.count(id)) subject_order.push_back(id);
    rows[id].push_back(std::move(r));
  }
  if (subject_order.empty()) throw EmptyDataset("'" + path + "' contains no data rows");

  // maximal grids: sorted unions of observed times and location ids
  std::set<double> all_times;
  std::map<double, std::vector<double>> loc_coords;
  for (const auto& [id, rs] : rows) {
    for (const auto& r : rs) {
      all_times.insert(r.time);
      auto it = loc_coords.find(r.loc);
      if (it == loc_coords.end()) {
        loc_coords[r.loc] = r.coords;
      } else if (it->second != r.coords) {
        throw DataError("inconsistent_location",
                        "location id " + format_number(r.loc) +
                            " appears with different coordinates (line " +
                            std::to_string(r.line_no) + ")");
      }
    }
  }

  Dataset ds;
  ds.t_max = static_cast<int>(all_times.size());
  ds.s_max = static_cast<int>(loc_coords.size());
  ds.grid_times = Vector(ds.t_max);
  {
    int i = 0;
    for (double t : all_times) ds.grid_times(i++) = t;
  }
  const int q = static_cast<int>(c_coords.size());
  ds.grid_locs = Matrix(ds.s_max, q);
  {
    int i = 0;
    for (const auto& [id, coords] : loc_coords) {
      ds.grid_loc_ids.push_back(id);
      for (int k = 0; k < q; ++k) ds.grid_locs(i, k) = coords[k];
      ++i;
    }
  }
  std::map<double, int> time_rank, loc_rank;
  for (int i = 0; i < ds.t_max; ++i) time_rank[ds.grid_times(i)] = i;
  for (int i = 0; i < ds.s_max; ++i) loc_rank[ds.grid_loc_ids[i]] = i;

  ds.coord_names = coord_names;
  ds.covariate_names = cov_names;
  if (options.intercept) ds.design_names.push_back("intercept");
  ds.design_names.insert(ds.design_names.end(), cov_names.begin(), cov_names.end());
  ds.p = static_cast<int>(ds.design_names.size());

  for (const auto& id : subject_order) {
    const auto& rs = rows[id];
    std::set<double> times_set, locs_set;
    std::map<std::pair<double, double>, const RawRow*> cell;
    for (const auto& r : rs) {
      times_set.insert(r.time);
      locs_set.insert(r.loc);
      auto key = std::make_pair(r.time, r.loc);
      if (cell.count(key))
        throw DuplicateObservation("subject '" + id + "' has duplicate observation at time " +
                                   format_number(r.time) + ", location " + format_number(r.loc) +
                                   " (line " + std::to_string(r.line_no) + ")");
      cell[key] = &r;
    }
    const int t = static_cast<int>(times_set.size());
    const int s = static_cast<int>(locs_set.size());
    if (static_cast<int>(rs.size()) != t * s)
      throw RaggedSubject("subject '" + id + "' observes " + std::to_string(rs.size()) +
                          " cells but its " + std::to_string(t) + " times x " + std::to_string(s) +
                          " locations grid has " + std::to_string(t * s) +
                          "; observations must form a complete sub-grid");

    SubjectData sub;
    sub.id = id;
    sub.times = Vector(t);
    sub.time_grid_idx.resize(t);
    {
      int j = 0;
      for (double tv : times_set) {
        sub.times(j) = tv;
        sub.time_grid_idx[j] = time_rank.at(tv);
        ++j;
      }
    }
    sub.locs = Matrix(s, q);
    sub.loc_grid_idx.resize(s);
    std::vector<double> sub_loc_ids;
    {
      int l = 0;
      for (double lv : locs_set) {
        sub_loc_ids.push_back(lv);
        sub.loc_grid_idx[l] = loc_rank.at(lv);
        for (int k = 0; k < q; ++k) sub.locs(l, k) = loc_coords.at(lv)[k];
        ++l;
      }
    }
    sub.y = Vector(t * s);
    sub.x = Matrix(t * s, ds.p);
    for (int j = 0; j < t; ++j) {
      for (int l = 0; l < s; ++l) {
        const RawRow* r = cell.at({sub.times(j), sub_loc_ids[l]});
        const int pos = j * s + l;
        sub.y(pos) = r->y;
        int col = 0;
        if (options.intercept) sub.x(pos, col++) = 1.0;
        for (double cv : r->covs) sub.x(pos, col++) = cv;
      }
    }
    ds.subjects.push_back(std::move(sub));
  }

  if (ds.n_subjects() <= ds.max_ts())
    ds.warnings.push_back("subject count N=" + std::to_string(ds.n_subjects()) +
                          " does not exceed max_i(t_i*s_i)=" + std::to_string(ds.max_ts()) +
                          "; the test assumes N > max_i(t_i*s_i)");
  return ds;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("file_not_writable", "cannot write '" + path + "'");
  out << "subject,y,time,loc";
  for (const auto& c : dataset.coord_names) out << ',' << c;
  for (const auto& c : dataset.covariate_names) out << ',' << c;
  out << '\n';
  const bool intercept =
      !dataset.design_names.empty() && dataset.design_names.front() == "intercept";
  for (const auto& sub : dataset.subjects) {
    for (int j = 0; j < sub.t(); ++j) {
      for (int l = 0; l < sub.s(); ++l) {
        const int pos = j * sub.s() + l;
        out << sub.id << ',' << format_number(sub.y(pos)) << ',' << format_number(sub.times(j))
            << ',' << format_number(dataset.grid_loc_ids.at(sub.loc_grid_idx[l]));
        for (int k = 0; k < sub.locs.cols(); ++k) out << ',' << format_number(sub.locs(l, k));
        for (int k = (intercept ? 1 : 0); k < dataset.p; ++k)
          out << ',' << format_number(sub.x(pos, k));
        out << '\n';
      }
    }
  }
}

DistanceScale distance_scale(const Dataset& dataset, Factor factor) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& sub : dataset.subjects) {
    if (factor == Factor::temporal) {
      for (int j = 0; j < sub.t(); ++j)
        for (int k = j + 1; k < sub.t(); ++k) {
          const double d = std::abs(sub.times(k) - sub.times(j));
          lo = std::min(lo, d);
          hi = std::max(hi, d);
          any = true;
        }
    } else {
      for (int j = 0; j < sub.s(); ++j)
        for (int k = j + 1; k < sub.s(); ++k) {
          const double d = (sub.locs.row(k) - sub.locs.row(j)).norm();
          lo = std::min(lo, d);
          hi = std::max(hi, d);
          any = true;
        }
    }
  }
  if (!any)
    throw DegenerateFactor(std::string("no pairwise distances on the ") +
                           (factor == Factor::temporal ? "temporal" : "spatial") +
                           " factor: every subject has a single point");
  return DistanceScale{lo, hi};
}

Vector residuals(const SubjectData& subject, const Vector& beta) {
  if (beta.size() != subject.x.cols())
    throw DimensionMismatch("residuals: beta length " + std::to_string(beta.size()) +
                            " != design columns " + std::to_string(subject.x.cols()));
  return subject.y - subject.x * beta;
}

Matrix time_dist(const SubjectData& subject) {
  const int t = subject.t();
  Matrix d = Matrix::Zero(t, t);
  for (int j = 0; j < t; ++j)
    for (int k = 0; k < t; ++k) d(j, k) = std::abs(subject.times(k) - subject.times(j));
  return d;
}

Matrix loc_dist(const SubjectData& subject) {
  const int s = subject.s();
  Matrix d = Matrix::Zero(s, s);
  for (int j = 0; j < s; ++j)
    for (int k = 0; k < s; ++k) d(j, k) = (subject.locs.row(k) - subject.locs.row(j)).norm();
  return d;
}

}  // namespace seplrt
