#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

// Fresh per-process temporary directories, removed when the process exits.
inline std::filesystem::path scratch(const std::string& name) {
  struct Registry {
    std::vector<std::filesystem::path> paths;
    ~Registry() {
      std::error_code ec;
      for (const auto& p : paths) std::filesystem::remove_all(p, ec);
    }
  };
  static Registry registry;
  const auto p = std::filesystem::temp_directory_path() /
                 ("paretofact-unit-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  registry.paths.push_back(p);
  return p;
}
