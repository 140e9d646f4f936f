#pragma once

// Trace CSV and metrics JSON.
//
// trace.csv: header `t,vdc2,vpll,iref_d,iref_q,controller,phase`, one row per
// controller sample, numbers printed with 9 significant digits.
//   controller in {cc, identifying, ispc}; phase in {nominal, fault, cleared}.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcpc/scenario.hpp"

namespace gcpc::io {

inline constexpr const char* kTraceHeader = "t,vdc2,vpll,iref_d,iref_q,controller,phase";
inline const std::vector<std::string> kTraceColumns = {"t",      "vdc2",       "vpll", "iref_d",
                                                       "iref_q", "controller", "phase"};

inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_trace_csv(const Trace& tr, std::ostream& os) {
  os << kTraceHeader << '\n';
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << format_g9(tr.t[i]) << ',' << format_g9(tr.vdc2[i]) << ',' << format_g9(tr.vpll[i]) << ','
       << format_g9(tr.iref_d[i]) << ',' << format_g9(tr.iref_q[i]) << ','
       << to_string(tr.controller[i]) << ',' << to_string(tr.phase[i]) << '\n';
  }
}

inline ControllerTag parse_controller_tag(const std::string& s) {
  if (s == "cc") return ControllerTag::cc;
  if (s == "identifying") return ControllerTag::identifying;
  if (s == "ispc") return ControllerTag::ispc;
  throw std::invalid_argument("trace csv: column 'controller' has unknown value '" + s + "'");
}

inline GridPhase parse_grid_phase(const std::string& s) {
  if (s == "nominal") return GridPhase::nominal;
  if (s == "fault") return GridPhase::fault;
  if (s == "cleared") return GridPhase::cleared;
  throw std::invalid_argument("trace csv: column 'phase' has unknown value '" + s + "'");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Parses a trace written by write_trace_csv. The diverged flag is not stored
// in the file; a trace is treated as complete.
inline Trace read_trace_csv(std::istream& is, double Ts = 1e-3) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("trace csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i >= header.size())
      throw std::invalid_argument("trace csv: missing column '" + kTraceColumns[i] + "'");
    if (header[i] != kTraceColumns[i])
      throw std::invalid_argument("trace csv: expected column '" + kTraceColumns[i] + "', found '" +
                                  header[i] + "'");
  }
  if (header.size() != kTraceColumns.size())
    throw std::invalid_argument("trace csv: unexpected extra column '" +
                                header[kTraceColumns.size()] + "'");

  Trace tr;
  tr.Ts = Ts;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kTraceColumns.size())
      throw std::invalid_argument("trace csv: row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells");
    double num[5];
    for (int c = 0; c < 5; ++c) {
      try {
        std::size_t used = 0;
        num[c] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("trace csv: column '" + kTraceColumns[c] + "' row " +
                                    std::to_string(row) + " is not a number");
      }
    }
    tr.push(num[0], {num[1], num[2]}, {num[3], num[4]}, parse_controller_tag(cells[5]),
            parse_grid_phase(cells[6]));
  }
  return tr;
}

inline nlohmann::json to_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const ChannelPair& p) {
  return {{"vdc2", to_json(p.vdc2)}, {"vpll", to_json(p.vpll)}};
}

// null entries mark not-settled or uncovered windows.
inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j{
      {"settling_during", to_json(m.settling_during)},
      {"settling_after", to_json(m.settling_after)},
      {"rmse_during", to_json(m.rmse_during)},
      {"rmse_after", to_json(m.rmse_after)},
      {"osc_amplitude", to_json(m.osc_amplitude)},
      {"stable", m.stable},
      {"diverged", m.diverged},
      {"tube_radius", {{"vdc2", m.tube.vdc2}, {"vpll", m.tube.vpll}}},
      {"tube_fallback", m.tube.fallback},
  };
  if (m.activation_time) {
    j["activation_time"] = *m.activation_time;
    j["settling_during_from_activation"] = to_json(m.settling_during_from_activation);
  }
  return j;
}

}  // namespace gcpc::io
