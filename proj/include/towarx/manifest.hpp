#pragma once

// Artifact writing with a content-hash manifest. Paths in the manifest are
// relative to the output directory and sorted, and no wall-clock data is
// recorded, so identical runs give identical manifests.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "json.hpp"

#include "towarx/error.hpp"

namespace towarx {

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

class ArtifactWriter {
public:
  ArtifactWriter(std::filesystem::path root, std::string command)
      : root_(std::move(root)), command_(std::move(command)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const { return root_; }

  /// Writes `content` to root/relative and records its hash.
  void write(const std::string& relative, std::string_view content) {
    const auto path = root_ / relative;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + path.string() + "'");
    artifacts_[relative] = {sha256_hex(content), content.size()};
  }

  /// Inputs are recorded by file name so the manifest does not depend on
  /// where the run happened.
  void record_input(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    inputs_[path.filename().string()] = {sha256_hex(bytes), bytes.size()};
  }

  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    const auto list = [](const std::map<std::string, Entry>& m) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& [path, e] : m) arr.push_back({{"path", path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
      return arr;
    };
    j["inputs"] = list(inputs_);
    j["artifacts"] = list(artifacts_);
    return j;
  }

  /// Writes manifest_<command>.json; returns its relative path.
  std::string finish() {
    const std::string name = "manifest_" + command_ + ".json";
    const auto text = manifest().dump(2) + "\n";
    const auto path = root_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    return name;
  }

private:
  struct Entry {
    std::string sha256;
    std::size_t bytes = 0;
  };
  std::filesystem::path root_;
  std::string command_;
  std::map<std::string, Entry> artifacts_;
  std::map<std::string, Entry> inputs_;
};

} // namespace towarx
