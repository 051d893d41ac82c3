#include "fundsim/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fundsim/errors.hpp"

namespace fundsim {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("rename failed for " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Manifest::write(const std::string& out_dir) const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& name : file_names) {
    const std::string content = read_file(out_dir + "/" + name);
    files.push_back({{"name", name},
                     {"bytes", content.size()},
                     {"fnv1a64", fnv1a64_hex(content)}});
  }
  nlohmann::json j{{"tool", "fundsim 0.1.0"},
                   {"scenario_digest", scenario_digest},
                   {"seed", seed},
                   {"files", files}};
  write_file_atomic(out_dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace fundsim
