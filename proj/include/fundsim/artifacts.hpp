#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fundsim {

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

// Formats a double with 17 significant digits (round-trip safe).
std::string format_full(double v);

// Writes via a temp file + rename so readers never observe partial content.
// Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Run manifest: every emitted file with size and checksum.
struct Manifest {
  std::string scenario_digest;
  std::uint64_t seed = 0;
  std::vector<std::string> file_names;  // relative to the output dir

  // Records name/size/checksum of `out_dir/name` entries and writes
  // manifest.json (itself excluded from the listing).
  void write(const std::string& out_dir) const;
};

}  // namespace fundsim
