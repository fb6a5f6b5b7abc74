#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

namespace testing_support {

inline std::filesystem::path data_dir() { return CIAF_DATA_DIR; }
inline std::filesystem::path bundled_ontology() { return data_dir() / "ontology" / "default.json"; }

// Fresh scratch directory per call, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("ciaf-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}


struct CliResult {
  int exit_code = -1;
  std::string out;
};

// Runs the ciaf binary with `args` (already shell-quoted), capturing stdout.
inline CliResult run_cli(const std::string& args, const std::filesystem::path& scratch,
                         const std::string& stdin_file = "") {
  const auto out_file = scratch / "cli-stdout.txt";
  std::string cmd = std::string("'") + CIAF_CLI_PATH + "' " + args + " > '" + out_file.string() + "' 2>/dev/null";
  if (!stdin_file.empty()) cmd += " < '" + stdin_file + "'";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  return r;
}

}  // namespace testing_support
