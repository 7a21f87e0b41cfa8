#include "krs/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace krs {

std::string format_shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_sig17(double v) {
  char buf[40];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

double parse_double(std::string_view tok, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{}) {
    throw std::runtime_error("bad numeric field '" + std::string(tok) + "' in " + path);
  }
  return v;
}

}  // namespace

void write_profile_csv(const std::string& path, const SolitonProfile& p) {
  std::ofstream out = open_out(path);
  out << "s,phi,dphi,d2phi,d3phi\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << format_sig17(p.grid[i]) << ',' << format_sig17(p.phi[i]) << ','
        << format_sig17(p.dphi[i]) << ',' << format_sig17(p.d2phi[i]) << ','
        << format_sig17(p.d3phi[i]) << '\n';
  }
}

void write_barrier_csv(const std::string& path, const BarrierProfile& bp) {
  std::ofstream out = open_out(path);
  out << "s,phib,dphib,d2phib,d3phib,bhat\n";
  const std::vector<double>& grid = bp.base->grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_shortest(grid[i]) << ',' << format_shortest(bp.phib[i]) << ','
        << format_shortest(bp.dphib[i]) << ',' << format_shortest(bp.d2phib[i])
        << ',' << format_shortest(bp.d3phib[i]) << ',' << format_shortest(bp.bhat[i])
        << '\n';
  }
}

void write_state_csv(const std::string& path, const RadialState& state) {
  std::ofstream out = open_out(path);
  out << "s,b,db,d2b\n";
  const std::vector<double>& grid = state.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_shortest(grid[i]) << ',' << format_shortest(state.b[i]) << ','
        << format_shortest(state.db[i]) << ',' << format_shortest(state.d2b[i])
        << '\n';
  }
}

StateCsv read_state_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("s,b,db,d2b", 0) != 0) {
    throw std::runtime_error("state CSV missing 's,b,db,d2b' header: " + path);
  }
  StateCsv out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> row{};
    std::size_t pos = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t next = c < 3 ? line.find(',', pos) : line.size();
      if (next == std::string::npos) {
        throw std::runtime_error("short row in " + path);
      }
      row[c] = parse_double(std::string_view(line).substr(pos, next - pos), path);
      pos = next + 1;
    }
    out.grid.push_back(row[0]);
    out.b.push_back(row[1]);
    out.db.push_back(row[2]);
    out.d2b.push_back(row[3]);
  }
  return out;
}

void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series) {
  std::ofstream out = open_out(path);
  out << "t,sup,inf,osc,lp,eq_rr_min,eq_rr_max,eq_tt_min,eq_tt_max,monotone,"
         "sign_changes\n";
  for (const DiagnosticSample& s : series.samples) {
    out << format_shortest(s.t) << ',' << format_shortest(s.sup) << ','
        << format_shortest(s.inf) << ',' << format_shortest(s.osc) << ','
        << format_shortest(s.lp) << ',' << format_shortest(s.eq_rr_min) << ','
        << format_shortest(s.eq_rr_max) << ',' << format_shortest(s.eq_tt_min)
        << ',' << format_shortest(s.eq_tt_max) << ',' << (s.monotone ? 1 : 0)
        << ',' << s.sign_changes << '\n';
  }
}

nlohmann::json spec_to_json(const BarrierSpec& spec) {
  return {{"K", spec.K},
          {"alpha", spec.alpha},
          {"R", spec.R},
          {"side", side_name(spec.side)},
          {"n", spec.n}};
}

nlohmann::json certification_to_json(const CertificationReport& rep) {
  nlohmann::json margins = nlohmann::json::array();
  for (const MarginRecord& m : rep.margins) {
    margins.push_back({{"name", m.name}, {"min", m.min}, {"s_at_min", m.s_at_min}});
  }
  return {{"certified", rep.certified},
          {"margins", margins},
          {"spec", spec_to_json(rep.spec)},
          {"equivalence",
           {{"phi_min", rep.eq_phi_min},
            {"phi_max", rep.eq_phi_max},
            {"dphi_min", rep.eq_dphi_min},
            {"dphi_max", rep.eq_dphi_max}}}};
}

std::string checkpoint_filename(double t) {
  return "state_t" + format_shortest(t) + ".csv";
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json v = nlohmann::json::object();
  for (const auto& [name, verdict] : verdicts) v[name] = verdict;
  return {{"command", command},
          {"config_digest", config_digest},
          {"tool_version", tool_version},
          {"started_utc", started_utc},
          {"finished_utc", finished_utc},
          {"outputs", outputs},
          {"verdicts", v}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out = open_out(path);
  out << contents;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace krs
