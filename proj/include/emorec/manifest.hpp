#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace emorec {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the file bytes; IoError when unreadable.
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t value);

// Provenance record written next to every artifact-producing run: the
// subcommand, its resolved flags, the fanned-out seeds, input digests, and
// output basenames. Contains nothing time-dependent, so identical runs write
// identical manifests.
struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> flags;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
  std::vector<std::string> outputs;

  void write(const std::string& path) const;
};

}  // namespace emorec
