#include "furnish/manifest.hpp"

#include <chrono>
#include <ctime>
#include <stdexcept>

#include <openssl/evp.h>

namespace furnish {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) {
    out += kHex[digest[k] >> 4];
    out += kHex[digest[k] & 0xf];
  }
  return out;
}

namespace {

nlohmann::json digests(const std::vector<FileDigest>& files) {
  auto out = nlohmann::json::array();
  for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return out;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["format"] = "furnish-manifest";
  j["version"] = 1;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["scenes"] = digests(scenes);
  j["artifacts"] = digests(artifacts);
  j["completed_stages"] = completed_stages;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at.empty() ? nlohmann::json(nullptr) : nlohmann::json(finished_at);
  j["complete"] = complete;
  if (!note.empty()) j["note"] = note;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buf;
}

}  // namespace furnish
