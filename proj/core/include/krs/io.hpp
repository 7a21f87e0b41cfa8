#pragma once

/// CSV/JSON artifacts: profile, barrier, state-snapshot and diagnostics CSV,
/// certification and run-summary JSON, the run manifest, and the numeric
/// formatting rules (profile CSV at 17 significant digits, everything else
/// shortest round-trip decimal).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "krs/barrier.hpp"
#include "krs/flow.hpp"
#include "krs/soliton.hpp"

namespace krs {

/// Shortest decimal that round-trips to the same binary64.
std::string format_shortest(double v);

/// Fixed 17 significant digits (also round-trip exact).
std::string format_sig17(double v);

/// FNV-1a 64-bit over raw bytes, as a 16-hex-digit string.
std::string fnv1a64_hex(std::string_view bytes);

void write_profile_csv(const std::string& path, const SolitonProfile& p);

void write_barrier_csv(const std::string& path, const BarrierProfile& bp);

void write_state_csv(const std::string& path, const RadialState& state);

struct StateCsv {
  std::vector<double> grid;
  std::vector<double> b;
  std::vector<double> db;
  std::vector<double> d2b;
};

StateCsv read_state_csv(const std::string& path);

void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series);

nlohmann::json certification_to_json(const CertificationReport& rep);

nlohmann::json spec_to_json(const BarrierSpec& spec);

/// `state_t<time>.csv`
std::string checkpoint_filename(double t);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string tool_version;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;                       // file names
  std::vector<std::pair<std::string, std::string>> verdicts;  // name -> pass/fail/skipped

  nlohmann::json to_json() const;
};

std::string utc_timestamp();

void write_text_file(const std::string& path, const std::string& contents);

std::string read_text_file(const std::string& path);

}  // namespace krs
