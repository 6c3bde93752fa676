#pragma once

// Machine-readable output records and their csv/json serialization.
//
// csv files carry a fixed header line and 17-significant-digit scientific
// notation, enough for a bit-exact round trip. json files are an object
// with a "meta" block (tool, version, command, full config echo) and a
// "rows" array. Identical inputs produce byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repure/errors.hpp"
#include "repure/purification.hpp"

namespace repure::io {

enum class FileFormat { csv, json };

inline std::string to_string(FileFormat f) { return f == FileFormat::csv ? "csv" : "json"; }

inline FileFormat format_from_string(const std::string& s) {
  if (s == "csv") return FileFormat::csv;
  if (s == "json") return FileFormat::json;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

/// One trajectory record: step, purity, record probability, and the three
/// independent entries of the 2x2 state.
struct TrajectoryRow {
  long k = 0;
  double purity = 0.0;
  double success_weight = 0.0;
  double rho11_re = 0.0, rho11_im = 0.0;
  double rho12_re = 0.0, rho12_im = 0.0;
  double rho22_re = 0.0, rho22_im = 0.0;
};

inline TrajectoryRow to_row(const TrajectoryStep& s) {
  const Mat2& m = s.state.matrix();
  TrajectoryRow r;
  r.k = s.k;
  r.purity = s.purity;
  r.success_weight = s.success_weight;
  r.rho11_re = m(0, 0).real();
  r.rho11_im = m(0, 0).imag();
  r.rho12_re = m(0, 1).real();
  r.rho12_im = m(0, 1).imag();
  r.rho22_re = m(1, 1).real();
  r.rho22_im = m(1, 1).imag();
  return r;
}

/// The analyze command's single record.
struct AnalysisRecord {
  double g = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c_tilde = 0.0;
  double det_rho0 = 0.0;
  bool local_min_at_1 = false;
  bool local_max_at_1_possible = false;
  long k_monotonic_sufficient = 0;
  long k_monotonic_simplified = 0;
  bool simplified_is_exact = false;
};

/// One cell of the threshold map (x = 2 eps tau / pi).
struct SweepRow {
  double p_up = 0.0;
  double two_eps_tau_over_pi = 0.0;
  double eta = 0.0;      ///< clamped to the configured plot cap
  double eta_raw = 0.0;  ///< untruncated value
  bool monotonic = false;
};

/// %.16e: 17 significant digits, the round-trip-exact width for doubles.
inline std::string fmt_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

// ---- csv ----

inline constexpr const char* kTrajectoryCsvHeader =
    "k,purity,success_weight,rho11_re,rho11_im,rho12_re,rho12_im,rho22_re,rho22_im";
inline constexpr const char* kAnalysisCsvHeader =
    "g,a,b,c_tilde,det_rho0,local_min_at_1,local_max_at_1_possible,"
    "k_monotonic_sufficient,k_monotonic_simplified,simplified_is_exact";
inline constexpr const char* kSweepCsvHeader = "p_up,two_eps_tau_over_pi,eta,eta_raw,monotonic";

inline void write_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  os << kTrajectoryCsvHeader << '\n';
  for (const TrajectoryRow& r : rows)
    os << r.k << ',' << fmt_sci(r.purity) << ',' << fmt_sci(r.success_weight) << ','
       << fmt_sci(r.rho11_re) << ',' << fmt_sci(r.rho11_im) << ',' << fmt_sci(r.rho12_re)
       << ',' << fmt_sci(r.rho12_im) << ',' << fmt_sci(r.rho22_re) << ','
       << fmt_sci(r.rho22_im) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<AnalysisRecord>& rows) {
  os << kAnalysisCsvHeader << '\n';
  for (const AnalysisRecord& r : rows)
    os << fmt_sci(r.g) << ',' << fmt_sci(r.a) << ',' << fmt_sci(r.b) << ','
       << fmt_sci(r.c_tilde) << ',' << fmt_sci(r.det_rho0) << ',' << int(r.local_min_at_1)
       << ',' << int(r.local_max_at_1_possible) << ',' << r.k_monotonic_sufficient << ','
       << r.k_monotonic_simplified << ',' << int(r.simplified_is_exact) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows)
    os << fmt_sci(r.p_up) << ',' << fmt_sci(r.two_eps_tau_over_pi) << ',' << fmt_sci(r.eta)
       << ',' << fmt_sci(r.eta_raw) << ',' << int(r.monotonic) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<std::vector<std::string>> read_csv_body(std::istream& is,
                                                           const char* expected_header,
                                                           std::size_t n_fields) {
  std::string line;
  if (!std::getline(is, line) || line != expected_header)
    throw ConfigError("csv: unexpected header line");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != n_fields) throw ConfigError("csv: wrong field count");
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace detail

inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is) {
  std::vector<TrajectoryRow> out;
  for (const auto& f : detail::read_csv_body(is, kTrajectoryCsvHeader, 9)) {
    TrajectoryRow r;
    r.k = std::stol(f[0]);
    r.purity = std::stod(f[1]);
    r.success_weight = std::stod(f[2]);
    r.rho11_re = std::stod(f[3]);
    r.rho11_im = std::stod(f[4]);
    r.rho12_re = std::stod(f[5]);
    r.rho12_im = std::stod(f[6]);
    r.rho22_re = std::stod(f[7]);
    r.rho22_im = std::stod(f[8]);
    out.push_back(r);
  }
  return out;
}

inline std::vector<AnalysisRecord> read_analysis_csv(std::istream& is) {
  std::vector<AnalysisRecord> out;
  for (const auto& f : detail::read_csv_body(is, kAnalysisCsvHeader, 10)) {
    AnalysisRecord r;
    r.g = std::stod(f[0]);
    r.a = std::stod(f[1]);
    r.b = std::stod(f[2]);
    r.c_tilde = std::stod(f[3]);
    r.det_rho0 = std::stod(f[4]);
    r.local_min_at_1 = std::stoi(f[5]) != 0;
    r.local_max_at_1_possible = std::stoi(f[6]) != 0;
    r.k_monotonic_sufficient = std::stol(f[7]);
    r.k_monotonic_simplified = std::stol(f[8]);
    r.simplified_is_exact = std::stoi(f[9]) != 0;
    out.push_back(r);
  }
  return out;
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::vector<SweepRow> out;
  for (const auto& f : detail::read_csv_body(is, kSweepCsvHeader, 5)) {
    SweepRow r;
    r.p_up = std::stod(f[0]);
    r.two_eps_tau_over_pi = std::stod(f[1]);
    r.eta = std::stod(f[2]);
    r.eta_raw = std::stod(f[3]);
    r.monotonic = std::stoi(f[4]) != 0;
    out.push_back(r);
  }
  return out;
}

// ---- json ----

inline nlohmann::json to_json(const TrajectoryRow& r) {
  return {{"k", r.k},
          {"purity", r.purity},
          {"success_weight", r.success_weight},
          {"rho11_re", r.rho11_re},
          {"rho11_im", r.rho11_im},
          {"rho12_re", r.rho12_re},
          {"rho12_im", r.rho12_im},
          {"rho22_re", r.rho22_re},
          {"rho22_im", r.rho22_im}};
}

inline nlohmann::json to_json(const AnalysisRecord& r) {
  return {{"g", r.g},
          {"a", r.a},
          {"b", r.b},
          {"c_tilde", r.c_tilde},
          {"det_rho0", r.det_rho0},
          {"local_min_at_1", r.local_min_at_1},
          {"local_max_at_1_possible", r.local_max_at_1_possible},
          {"k_monotonic_sufficient", r.k_monotonic_sufficient},
          {"k_monotonic_simplified", r.k_monotonic_simplified},
          {"simplified_is_exact", r.simplified_is_exact}};
}

inline nlohmann::json to_json(const SweepRow& r) {
  return {{"p_up", r.p_up},
          {"two_eps_tau_over_pi", r.two_eps_tau_over_pi},
          {"eta", r.eta},
          {"eta_raw", r.eta_raw},
          {"monotonic", r.monotonic}};
}

template <typename Row>
inline std::string to_json_document(const nlohmann::json& meta, const std::vector<Row>& rows) {
  nlohmann::json doc;
  doc["meta"] = meta;
  doc["rows"] = nlohmann::json::array();
  for (const Row& r : rows) doc["rows"].push_back(to_json(r));
  return doc.dump(2) + "\n";
}

inline TrajectoryRow trajectory_row_from_json(const nlohmann::json& j) {
  TrajectoryRow r;
  r.k = j.at("k").get<long>();
  r.purity = j.at("purity").get<double>();
  r.success_weight = j.at("success_weight").get<double>();
  r.rho11_re = j.at("rho11_re").get<double>();
  r.rho11_im = j.at("rho11_im").get<double>();
  r.rho12_re = j.at("rho12_re").get<double>();
  r.rho12_im = j.at("rho12_im").get<double>();
  r.rho22_re = j.at("rho22_re").get<double>();
  r.rho22_im = j.at("rho22_im").get<double>();
  return r;
}

inline std::vector<TrajectoryRow> read_trajectory_json(std::istream& is) {
  const nlohmann::json doc = nlohmann::json::parse(is);
  std::vector<TrajectoryRow> out;
  for (const auto& j : doc.at("rows")) out.push_back(trajectory_row_from_json(j));
  return out;
}

/// Serialize first, then write in one shot; a partially written file is
/// removed before the error escapes.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open output file '" + path.string() + "'");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  os.flush();
  if (!os) {
    os.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw Error("failed writing output file '" + path.string() + "'");
  }
}

}  // namespace repure::io
