#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hhdr/bath.hpp"
#include "hhdr/sequence.hpp"

// Text table / manifest / serialization helpers. All floating-point output
// uses 17 significant digits so emitted files are byte-reproducible and
// round-trip losslessly.

namespace hhdr {

std::string format_g17(double x);

// Tab-separated table with '#'-prefixed header lines.
struct Table {
  std::vector<std::string> header;   // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
std::string render_table(const Table& t);
void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// FNV-1a 64-bit content digest, hex-encoded.
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

// Map and bath files round-trip through these losslessly.
std::string render_map(const SpectroscopyMap& map);
SpectroscopyMap parse_map(const std::string& text);

std::string render_bath(const NuclearBath& bath);
NuclearBath parse_bath(const std::string& text, const Constants& c);

// Run manifest (JSON): command, seed, config echo, output digests, wall
// time. Wall time is the only field allowed to differ between reruns; the
// thread count is deliberately not recorded so serial and parallel runs
// emit identical manifests (modulo wall time).
struct ManifestEntry {
  std::string name;
  std::string digest;
  std::size_t bytes = 0;
};
std::string render_manifest(const std::string& command, std::uint64_t seed,
                            const std::string& config_echo,
                            const std::vector<ManifestEntry>& outputs, double wall_ms);

}  // namespace hhdr
