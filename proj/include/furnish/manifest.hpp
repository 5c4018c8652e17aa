#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace furnish {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<FileDigest> scenes;
  std::vector<FileDigest> artifacts;
  std::vector<int> completed_stages;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;  // empty while running
  bool complete = false;
  std::string note;         // why an incomplete run stopped

  nlohmann::json to_json() const;
};

std::string utc_timestamp();

}  // namespace furnish
