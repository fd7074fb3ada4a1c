#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace adhominem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kVersion = "0.1.0";

// Record of one invocation, written as JSON next to the command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
  std::vector<std::string> outputs;
  std::string started;
  std::string finished;
  std::string version = kVersion;

  void add_input(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path);  // stamps `finished`
};

std::string file_hash(const std::filesystem::path& path);

// Parses and runs one subcommand. Returns 0 on success, 1 on usage errors
// (usage text goes to `err`), 2 on data or model errors.
int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adhominem::cli
