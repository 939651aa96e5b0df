#pragma once

// CSV output for run records and benchmark summaries.

#include "itreg/imaging.hpp"
#include "itreg/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace itreg {

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw FormatError("csv: bad number '" + s + "'");
  return v;
}

/// Per-iteration metrics. `quality`, when given, must align with rec.rows
/// and adds the mse, psnr and ssim columns.
inline void write_metrics_csv(std::ostream& out, const RunRecord& rec,
                              const std::vector<ImageQuality>* quality = nullptr) {
  if (quality && quality->size() != rec.rows.size()) {
    throw DimensionError("write_metrics_csv: quality rows do not match metric rows");
  }
  out << "# feasibility_ref=" << (rec.feasibility_exact ? "exact" : "noisy") << '\n';
  out << "iter,time_s,lagrangian_gap,feasibility,recon_error";
  if (quality) out << ",mse,psnr,ssim";
  out << '\n';
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const MetricRow& r = rec.rows[i];
    out << r.iter << ',' << format_double(r.time_s) << ',' << format_double(r.lagrangian_gap) << ','
        << format_double(r.feasibility) << ',' << format_double(r.recon_error);
    if (quality) {
      const ImageQuality& q = (*quality)[i];
      out << ',' << format_double(q.mse) << ',' << format_double(q.psnr) << ','
          << format_double(q.ssim);
    }
    out << '\n';
  }
  out << "# stop=" << rec.early_stop.rule << ",iter=" << rec.early_stop.stop_iter
      << ",value=" << format_double(rec.early_stop.value) << '\n';
}

/// Parsed metrics file: header names and numeric rows, comments dropped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw FormatError("csv: no column " + name);
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Reads an all-numeric CSV after its header line.
inline CsvTable read_numeric_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    if (t.header.empty()) {
      t.header = split_csv_line(line);
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) throw FormatError("csv: ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace itreg
