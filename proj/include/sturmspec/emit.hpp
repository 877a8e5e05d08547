#pragma once

// Plot-ready emission of every CLI artifact.  CSV files carry a header row,
// RFC 4180 quoting, '.' decimals and 17-significant-digit floats so values
// round-trip exactly; JSON uses ordered_json to keep key order stable, which
// makes repeated runs byte-identical.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sturmspec/spectrum.hpp"
#include "sturmspec/words.hpp"

namespace sturmspec {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += csv_field(header[j]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += csv_field(row[j]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

inline std::string csv_approximants(const std::vector<Approximant>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const Approximant& a : rows)
    body.push_back({std::to_string(a.k), int128_to_string(a.p),
                    int128_to_string(a.q)});
  return detail::csv_table({"k", "p", "q"}, body);
}

// p and q are serialized as strings: they outgrow 64-bit integers long
// before the 128-bit arithmetic gives up
inline ordered_json json_approximants(const std::vector<Approximant>& rows) {
  ordered_json out = ordered_json::array();
  for (const Approximant& a : rows)
    out.push_back({{"k", a.k},
                   {"p", int128_to_string(a.p)},
                   {"q", int128_to_string(a.q)}});
  return out;
}

inline std::string csv_bands(const BandSet& bs) {
  std::vector<std::vector<std::string>> body;
  for (const Band& b : bs.bands)
    body.push_back({std::to_string(b.level), detail::fmt_double(b.lo), detail::fmt_double(b.hi)});
  return detail::csv_table({"level", "lo", "hi"}, body);
}

inline ordered_json json_bands(const BandSet& bs) {
  ordered_json out = ordered_json::array();
  for (const Band& b : bs.bands)
    out.push_back({{"level", b.level}, {"lo", b.lo}, {"hi", b.hi}});
  return out;
}

inline std::string csv_gaps(const std::vector<Gap>& gaps, long long level) {
  std::vector<std::vector<std::string>> body;
  for (const Gap& g : gaps)
    body.push_back({std::to_string(level), detail::fmt_double(g.lo), detail::fmt_double(g.hi),
                    g.label ? std::to_string(*g.label) : "",
                    g.ids_value ? detail::fmt_double(*g.ids_value) : ""});
  return detail::csv_table({"level", "lo", "hi", "label", "ids_value"}, body);
}

inline ordered_json json_gaps(const std::vector<Gap>& gaps, long long level) {
  ordered_json out = ordered_json::array();
  for (const Gap& g : gaps) {
    ordered_json row{{"level", level}, {"lo", g.lo}, {"hi", g.hi}};
    row["label"] = g.label ? ordered_json(*g.label) : ordered_json(nullptr);
    row["ids_value"] = g.ids_value ? ordered_json(*g.ids_value) : ordered_json(nullptr);
    out.push_back(row);
  }
  return out;
}

inline std::string csv_trace_orbit(const OrbitResult& orbit) {
  std::vector<std::vector<std::string>> body;
  for (const OrbitStep& s : orbit.trajectory)
    body.push_back({std::to_string(s.k), std::to_string(s.a), detail::fmt_double(s.p.x),
                    detail::fmt_double(s.p.y), detail::fmt_double(s.p.z),
                    detail::fmt_double(s.invariant_drift)});
  return detail::csv_table({"k", "a_k", "x", "y", "z", "i_drift"}, body);
}

inline ordered_json json_trace_orbit(const OrbitResult& orbit) {
  ordered_json steps = ordered_json::array();
  for (const OrbitStep& s : orbit.trajectory)
    steps.push_back({{"k", s.k},
                     {"a_k", s.a},
                     {"x", s.p.x},
                     {"y", s.p.y},
                     {"z", s.p.z},
                     {"i_drift", s.invariant_drift}});
  const char* status = orbit.status == OrbitStatus::Bounded    ? "bounded"
                       : orbit.status == OrbitStatus::Escaped ? "escaped"
                                                              : "overflow";
  return ordered_json{{"status", status},
                      {"escape_step", orbit.escape_step},
                      {"steps_taken", orbit.steps_taken},
                      {"invariant_drift", orbit.invariant_drift},
                      {"steps", steps}};
}

inline std::string csv_ids(const IDSTable& table) {
  std::vector<std::vector<std::string>> body;
  for (std::size_t i = 0; i < table.energies.size(); ++i)
    body.push_back({detail::fmt_double(table.energies[i]), detail::fmt_double(table.values[i])});
  return detail::csv_table({"E", "N"}, body);
}

inline ordered_json json_ids(const IDSTable& table) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < table.energies.size(); ++i)
    out.push_back({{"E", table.energies[i]}, {"N", table.values[i]}});
  return out;
}

inline std::string csv_gap_labels(const std::vector<GapLabel>& labels) {
  std::vector<std::vector<std::string>> body;
  for (const GapLabel& l : labels)
    body.push_back({std::to_string(l.m), detail::fmt_double(l.value)});
  return detail::csv_table({"m", "value"}, body);
}

inline ordered_json json_gap_labels(const std::vector<GapLabel>& labels) {
  ordered_json out = ordered_json::array();
  for (const GapLabel& l : labels) out.push_back({{"m", l.m}, {"value", l.value}});
  return out;
}

inline std::string csv_gap_opening(const std::vector<GapOpeningRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const GapOpeningRow& r : rows)
    body.push_back({detail::fmt_double(r.lambda), detail::fmt_double(r.width),
                    detail::fmt_double(r.ratio), r.error});
  return detail::csv_table({"lambda", "width", "ratio", "error"}, body);
}

inline ordered_json json_gap_opening(const std::vector<GapOpeningRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const GapOpeningRow& r : rows)
    out.push_back(
        {{"lambda", r.lambda}, {"width", r.width}, {"ratio", r.ratio}, {"error", r.error}});
  return out;
}

inline ordered_json json_dimension_report(const BandSet& bs, const ThicknessReport& tr,
                                          double boxdim, const std::vector<double>& scales) {
  return ordered_json{{"level", bs.level},
                      {"bands", static_cast<long long>(bs.bands.size())},
                      {"measure", bs.total_measure()},
                      {"tau", tr.tau},
                      {"theta", tr.theta},
                      {"dim_lower", tr.dim_lower},
                      {"dim_upper", tr.dim_upper},
                      {"boxdim", boxdim},
                      {"scales", scales}};
}

inline ordered_json json_dos_report(const LocalDimensionEstimate& est) {
  ordered_json samples = ordered_json::array();
  for (const LocalDimensionSample& s : est.samples)
    samples.push_back({{"energy", s.energy}, {"slope", s.slope}, {"residual", s.residual}});
  return ordered_json{{"d_estimate", est.d_estimate},
                      {"epsilon_min", est.epsilon_min},
                      {"epsilon_max", est.epsilon_max},
                      {"discarded", est.discarded},
                      {"samples", samples}};
}

inline ordered_json json_word(const Word& w, const std::string& alpha_text, double omega) {
  long long ones = 0;
  for (char c : w)
    if (c == '1') ++ones;
  return ordered_json{{"alpha", alpha_text},
                      {"omega", omega},
                      {"length", static_cast<long long>(w.size())},
                      {"ones", ones},
                      {"word", w}};
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace sturmspec
