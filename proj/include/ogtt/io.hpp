#ifndef OGTT_IO_HPP
#define OGTT_IO_HPP

// CSV and JSON formats for patients, chains, summaries and trajectories.
// Numbers are written with 12 significant digits.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ogtt/inference.hpp"
#include "ogtt/model.hpp"
#include "ogtt/patient.hpp"

namespace ogtt {

using Json = nlohmann::ordered_json;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// x rounded to the precision it is written with.
inline double round_to_output(double x) { return std::isfinite(x) ? std::stod(format_number(x)) : x; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Ids become file names, so they are restricted to [A-Za-z0-9_.-].
inline bool valid_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

inline constexpr std::string_view kPatientHeader = "id,g0,g30,g60,g90,g120";

struct RowError {
  std::size_t line;
  std::string message;
};

struct PatientTable {
  std::vector<PatientRecord> records;
  std::vector<RowError> errors;
};

/// Bad rows are collected with their 1-based line numbers; throws ParseError
/// on a bad header or when no row is valid.
inline PatientTable parse_patients(std::istream& in) {
  PatientTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::set<std::string, std::less<>> ids;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (!header_seen) {
      const auto expected = split_fields(kPatientHeader);
      if (fields != expected)
        throw ParseError("expected header '" + std::string(kPatientHeader) + "'", lineno);
      header_seen = true;
      continue;
    }
    auto fail = [&](std::string msg) { table.errors.push_back({lineno, std::move(msg)}); };
    if (fields.size() != 6) {
      fail("expected 6 fields, found " + std::to_string(fields.size()));
      continue;
    }
    const std::string id(fields[0]);
    if (!valid_id(id)) {
      fail("invalid id '" + id + "'");
      continue;
    }
    if (ids.count(id)) {
      fail("duplicate id '" + id + "'");
      continue;
    }
    GlucoseSeries g{};
    bool ok = true;
    for (std::size_t k = 0; k < 5 && ok; ++k) {
      const auto v = parse_double(fields[k + 1]);
      if (!v || !std::isfinite(*v)) {
        fail("non-numeric value '" + std::string(fields[k + 1]) + "'");
        ok = false;
      } else if (*v <= kMinGlucose || *v >= kMaxGlucose) {
        fail("value " + std::string(fields[k + 1]) + " outside (20, 600)");
        ok = false;
      } else {
        g[k] = *v;
      }
    }
    if (!ok) continue;
    ids.insert(id);
    table.records.push_back(PatientRecord::make(id, g));
  }
  if (!header_seen) throw ParseError("empty patient file", lineno);
  if (table.records.empty()) throw ParseError("no valid patient rows", lineno);
  return table;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

inline PatientTable parse_patients(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_patients(in);
}

inline void write_patients(std::ostream& out, const std::vector<PatientRecord>& records) {
  out << kPatientHeader << '\n';
  for (const auto& r : records) {
    out << r.id;
    for (double g : r.glucose) out << ',' << format_number(g);
    out << '\n';
  }
}

/// Numeric CSV with a header row; every field must parse as a number.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("no column " + std::string(name));
    const auto j = std::size_t(it - columns.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
  }
};

inline NumericTable read_numeric_csv(std::istream& in) {
  NumericTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (t.columns.empty()) {
      for (auto f : fields) t.columns.emplace_back(f);
      continue;
    }
    if (fields.size() != t.columns.size()) throw ParseError("wrong number of fields", lineno);
    std::vector<double> row;
    for (auto f : fields) {
      const auto v = parse_double(f);
      if (!v) throw ParseError("non-numeric value '" + std::string(f) + "'", lineno);
      row.push_back(*v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ParseError("missing header", lineno);
  return t;
}

inline NumericTable read_numeric_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_numeric_csv(in);
}

/// Columns iter, theta0, theta1, theta2, gb, theta3, logpost; every step including burn-in.
inline void write_chain(std::ostream& out, const Chain& chain) {
  out << "iter";
  for (const char* name : kParamNames) out << ',' << name;
  out << ",logpost\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i;
    for (double v : chain.sample(i)) out << ',' << format_number(v);
    out << ',' << format_number(chain.logpost[i]) << '\n';
  }
}

/// Columns t, the seven states, then the m = 1, 2, 3 GI stage curves.
inline void write_trajectory(std::ostream& out, const Trajectory& traj, const ModelParams& p) {
  out << 't';
  for (const char* name : kStateNames) out << ',' << name;
  out << ",gi_m1,gi_m2,gi_m3\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    out << format_number(t);
    for (double v : traj.states[i].as_array()) out << ',' << format_number(v);
    for (int m = 1; m <= 3; ++m) out << ',' << format_number(gi_erlang_stage(m, t, p.theta0, p.V0));
    out << '\n';
  }
}

inline Json params_json(const ParamVector& v) {
  Json j = Json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) j[kParamNames[i]] = round_to_output(v[i]);
    else j[kParamNames[i]] = nullptr;
  }
  return j;
}

inline ParamVector params_from_json(const Json& j) {
  ParamVector v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Json& x = j.at(kParamNames[i]);
    v[i] = x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
  }
  return v;
}

struct SummaryRecord {
  std::string id;
  Category category = Category::H;
  PosteriorSummary summary;
  std::size_t n_iter = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain_seed = 0;
};

inline Json summary_json(const SummaryRecord& r) {
  const PosteriorSummary& s = r.summary;
  Json j;
  j["id"] = r.id;
  j["category"] = std::string(to_string(r.category));
  j["map"] = params_json(s.map);
  j["cm"] = params_json(s.cm);
  j["median"] = params_json(s.median);
  j["std"] = params_json(s.stdev);
  for (std::size_t k = 0; k < kQuantileGrid.size(); ++k)
    j["q" + std::to_string(kQuantileGrid[k])] = params_json(s.quantiles[k]);
  j["iat"] = s.iat ? Json(round_to_output(*s.iat)) : Json(nullptr);
  j["iat_per_param"] = s.iat_per_param() ? Json(round_to_output(*s.iat_per_param())) : Json(nullptr);
  j["iat_coords"] = params_json(s.iat_coords);
  j["map_logpost"] = round_to_output(s.map_logpost);
  j["rmse_map"] = round_to_output(s.rmse_at_map);
  j["n_samples"] = s.n_samples;
  j["n_iter"] = r.n_iter;
  j["burn_in"] = r.burn_in;
  j["seed"] = r.seed;
  j["chain_seed"] = r.chain_seed;
  return j;
}

inline SummaryRecord summary_from_json(const Json& j) {
  SummaryRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto cat = category_from_string(j.at("category").get<std::string>());
    if (!cat) throw InvalidArgument("unknown category in summary for " + r.id);
    r.category = *cat;
    PosteriorSummary& s = r.summary;
    s.map = params_from_json(j.at("map"));
    s.cm = params_from_json(j.at("cm"));
    s.median = params_from_json(j.at("median"));
    s.stdev = params_from_json(j.at("std"));
    for (std::size_t k = 0; k < kQuantileGrid.size(); ++k)
      s.quantiles[k] = params_from_json(j.at("q" + std::to_string(kQuantileGrid[k])));
    if (!j.at("iat").is_null()) s.iat = j.at("iat").get<double>();
    if (j.contains("iat_coords")) s.iat_coords = params_from_json(j.at("iat_coords"));
    s.map_logpost = j.value("map_logpost", 0.0);
    s.rmse_at_map = j.at("rmse_map").get<double>();
    s.n_samples = j.value("n_samples", std::size_t{0});
    r.n_iter = j.at("n_iter").get<std::size_t>();
    r.burn_in = j.at("burn_in").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.chain_seed = j.value("chain_seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed summary: ") + e.what());
  }
  return r;
}

inline SummaryRecord read_summary(const std::filesystem::path& path) {
  auto in = open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return summary_from_json(j);
}

}  // namespace ogtt

#endif  // OGTT_IO_HPP
