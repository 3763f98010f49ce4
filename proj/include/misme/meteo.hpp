#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "misme/csv.hpp"
#include "misme/error.hpp"
#include "misme/util.hpp"

namespace misme::data {

// The sixteen station variables, in table order. ASCII transliterations are
// the canonical CSV column names (Phi_solar, theta_wind).
enum class Var : int {
  T_air = 0,
  T_mod,
  T_hs,
  RH,
  RH_mod,
  P,
  Phi_solar,
  P_vapor,
  P_bar,
  v_wind,
  v_gust,
  v_north,
  v_east,
  theta_wind,
  Tilt_NS,
  Tilt_WE,
};

inline constexpr std::size_t kVarCount = 16;

inline constexpr std::array<const char*, kVarCount> kVarNames = {
    "T_air", "T_mod",  "T_hs",  "RH",     "RH_mod", "P",          "Phi_solar", "P_vapor",
    "P_bar", "v_wind", "v_gust", "v_north", "v_east", "theta_wind", "Tilt_NS",   "Tilt_WE",
};

inline const char* var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

inline Var var_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kVarCount; ++i) {
    if (name == kVarNames[i]) return static_cast<Var>(i);
  }
  throw SchemaError("unknown meteorological variable '" + name + "'");
}

// One observation row: the 16 variables plus the target and identity fields.
struct MeteoRecord {
  std::string station_id;
  std::string timestamp;  // ISO-8601
  std::array<double, kVarCount> vars{};
  double vwc = 0.0;

  double var(Var v) const { return vars[static_cast<int>(v)]; }
  double& var(Var v) { return vars[static_cast<int>(v)]; }

  // Physical-range invariants; violations reject the row, not the file.
  std::string invariant_violation() const {
    auto bad = [](const std::string& what) { return what; };
    if (var(Var::RH) < 0.0 || var(Var::RH) > 100.0) return bad("RH outside [0, 100]");
    if (var(Var::RH_mod) < 0.0 || var(Var::RH_mod) > 100.0) return bad("RH_mod outside [0, 100]");
    if (var(Var::P) < 0.0) return bad("P negative");
    if (var(Var::Phi_solar) < 0.0) return bad("Phi_solar negative");
    if (!(vwc > 0.0 && vwc < 1.0)) return bad("vwc outside (0, 1)");
    return {};
  }
};

struct MeteoLoadResult {
  std::vector<MeteoRecord> records;
  std::vector<std::string> warnings;  // one per rejected row, with row number
};

// Reads a station CSV. `schema` maps canonical column names to the file's
// actual header names for files produced with different conventions.
inline MeteoLoadResult load_meteo_table(const std::filesystem::path& path,
                                        const std::map<std::string, std::string>& schema = {}) {
  const CsvTable table = read_csv(path);

  auto actual = [&schema](const std::string& canonical) {
    auto it = schema.find(canonical);
    return it == schema.end() ? canonical : it->second;
  };

  const int station_col = table.require_column(actual("station_id"));
  const int time_col = table.require_column(actual("timestamp"));
  const int vwc_col = table.require_column(actual("vwc"));
  std::array<int, kVarCount> var_cols{};
  for (std::size_t i = 0; i < kVarCount; ++i) {
    var_cols[i] = table.require_column(actual(kVarNames[i]));
  }

  MeteoLoadResult result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line_no = r + 2;  // header is line 1
    MeteoRecord rec;
    rec.station_id = row[station_col];
    rec.timestamp = row[time_col];
    try {
      rec.vwc = parse_double(row[vwc_col]);
      for (std::size_t i = 0; i < kVarCount; ++i) {
        rec.vars[i] = parse_double(row[var_cols[i]]);
      }
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string violation = rec.invariant_violation();
    if (!violation.empty()) {
      result.warnings.push_back("line " + std::to_string(line_no) + " rejected: " + violation);
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace misme::data
