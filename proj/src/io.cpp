#include "hhdr/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hhdr {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string render_table(const Table& t) {
  std::ostringstream out;
  for (const auto& h : t.header) out << "# " << h << '\n';
  if (!t.columns.empty()) {
    out << '#';
    for (const auto& c : t.columns) out << '\t' << c;
    out << '\n';
  }
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << '\t';
      out << format_g17(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string render_map(const SpectroscopyMap& map) {
  std::ostringstream out;
  out << "# spectroscopy map: rows = omega [Hz], columns = tau [s], cells = p0\n";
  out << "# omega";
  for (int i = 0; i < map.omega.size(); ++i) out << '\t' << format_g17(map.omega(i));
  out << "\n# tau";
  for (int j = 0; j < map.tau.size(); ++j) out << '\t' << format_g17(map.tau(j));
  out << '\n';
  for (int i = 0; i < map.value.rows(); ++i) {
    for (int j = 0; j < map.value.cols(); ++j) {
      if (j) out << '\t';
      out << format_g17(map.value(i, j));
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<double> split_numbers(const std::string& line, std::size_t skip_fields) {
  std::istringstream in(line);
  std::string tok;
  std::vector<double> out;
  for (std::size_t i = 0; i < skip_fields; ++i) in >> tok;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

}  // namespace

SpectroscopyMap parse_map(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SpectroscopyMap map;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# omega", 0) == 0) {
      auto v = split_numbers(line, 2);
      map.omega = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    } else if (line.rfind("# tau", 0) == 0) {
      auto v = split_numbers(line, 2);
      map.tau = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    } else if (line.front() == '#') {
      continue;
    } else {
      rows.push_back(split_numbers(line, 0));
    }
  }
  if (map.omega.size() == 0 || map.tau.size() == 0 ||
      rows.size() != static_cast<std::size_t>(map.omega.size()))
    throw std::runtime_error("parse_map: malformed map file");
  map.value.resize(map.omega.size(), map.tau.size());
  for (int i = 0; i < map.value.rows(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(map.tau.size()))
      throw std::runtime_error("parse_map: ragged map row");
    for (int j = 0; j < map.value.cols(); ++j) map.value(i, j) = rows[i][j];
  }
  return map;
}

std::string render_bath(const NuclearBath& bath) {
  std::ostringstream out;
  out << "# bath: x y z [m], A_x A_y A_z [T], polarization\n";
  out << "# b\t" << format_g17(bath.config.b.x()) << '\t' << format_g17(bath.config.b.y()) << '\t'
      << format_g17(bath.config.b.z()) << '\n';
  out << "# nv_axis\t" << format_g17(bath.config.nv_axis.x()) << '\t'
      << format_g17(bath.config.nv_axis.y()) << '\t' << format_g17(bath.config.nv_axis.z())
      << '\n';
  out << "# seed\t" << bath.config.seed << '\n';
  for (int k = 0; k < bath.size(); ++k) {
    const Vec3& r = bath.positions[k];
    const Vec3& a = bath.hyperfine[k];
    out << format_g17(r.x()) << '\t' << format_g17(r.y()) << '\t' << format_g17(r.z()) << '\t'
        << format_g17(a.x()) << '\t' << format_g17(a.y()) << '\t' << format_g17(a.z()) << '\t'
        << format_g17(bath.polarization(k)) << '\n';
  }
  return out.str();
}

NuclearBath parse_bath(const std::string& text, const Constants& c) {
  NuclearBath bath;
  bath.constants = c;
  std::istringstream in(text);
  std::string line;
  std::vector<double> pol;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# b\t", 0) == 0) {
      auto v = split_numbers(line, 2);
      if (v.size() == 3) bath.config.b = Vec3(v[0], v[1], v[2]);
      continue;
    }
    if (line.rfind("# nv_axis\t", 0) == 0) {
      auto v = split_numbers(line, 2);
      if (v.size() == 3) bath.config.nv_axis = Vec3(v[0], v[1], v[2]);
      continue;
    }
    if (line.rfind("# seed\t", 0) == 0) {
      auto v = split_numbers(line, 2);
      if (v.size() == 1) bath.config.seed = static_cast<std::uint64_t>(v[0]);
      continue;
    }
    if (line.front() == '#') continue;
    auto v = split_numbers(line, 0);
    if (v.size() != 7) throw std::runtime_error("parse_bath: expected 7 columns");
    bath.positions.emplace_back(v[0], v[1], v[2]);
    bath.hyperfine.emplace_back(v[3], v[4], v[5]);
    pol.push_back(v[6]);
  }
  bath.polarization = Eigen::Map<Eigen::VectorXd>(pol.data(), pol.size());
  return bath;
}

std::string render_manifest(const std::string& command, std::uint64_t seed,
                            const std::string& config_echo,
                            const std::vector<ManifestEntry>& outputs, double wall_ms) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_echo;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& e : outputs)
    j["outputs"].push_back({{"name", e.name}, {"digest", e.digest}, {"bytes", e.bytes}});
  j["wall_ms"] = wall_ms;
  return j.dump(2) + "\n";
}

}  // namespace hhdr
