#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "envdiff/curves.hpp"
#include "envdiff/experiment.hpp"

namespace envdiff::io {

inline constexpr const char* kToolName = "envdiff";
inline constexpr const char* kToolVersion = "1.0.0";

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

// Flat "key = value" file; '#' starts a comment. Duplicate or malformed lines
// throw std::runtime_error with the line number.
std::map<std::string, std::string> parse_key_values(std::istream& in);

struct RunConfig {
  experiment::ExperimentConfig experiment;
  int reps = 400;
  int grid = 101;
  curves::NEstimator n_estimator = curves::NEstimator::Median;
};

const std::vector<std::string>& config_keys();

// `rule` is required, and so is `strategy` unless require_strategy is false.
// Unknown keys and malformed values throw, naming the key.
RunConfig config_from_map(const std::map<std::string, std::string>& values, bool require_strategy = true);
RunConfig load_config(const std::filesystem::path& path, bool require_strategy = true);
std::map<std::string, std::string> config_to_map(const RunConfig& config);
// Body of a config file that reproduces `config`.
std::string format_config(const RunConfig& config);

// Inventory of a run's outputs, written last as manifest.json.
class Manifest {
 public:
  Manifest(std::string command, std::map<std::string, std::string> settings);

  // Writes `content` atomically under dir/name and records its hash.
  void emit(const std::filesystem::path& dir, const std::string& name, std::string_view content);
  void set_extra(const std::string& key, const std::string& value);
  std::string to_json() const;
  void write(const std::filesystem::path& dir) const;

  struct File {
    std::string name;
    std::size_t bytes = 0;
    std::string sha256;
  };
  const std::vector<File>& files() const { return files_; }

 private:
  std::string command_;
  std::map<std::string, std::string> settings_;
  std::map<std::string, std::string> extra_;
  std::vector<File> files_;
  std::string created_;
};

}  // namespace envdiff::io
