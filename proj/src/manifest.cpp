#include "emorec/manifest.hpp"

#include <array>
#include <fstream>

#include "json.hpp"

#include "emorec/errors.hpp"
#include "emorec/rng.hpp"

namespace emorec {

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for digest: " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  std::array<char, 65536> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["tool_version"] = kToolVersion;
  j["flags"] = nlohmann::json::object();
  for (const auto& [key, value] : flags) j["flags"][key] = value;
  j["seeds"] = nlohmann::json::object();
  for (const auto& [role, seed] : seeds) j["seeds"][role] = seed;
  j["inputs"] = nlohmann::json::object();
  for (const auto& [file, digest] : inputs) j["inputs"][file] = digest;
  j["outputs"] = outputs;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

}  // namespace emorec
