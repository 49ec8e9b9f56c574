#include "envdiff/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "envdiff/complexity.hpp"
#include "json.hpp"

namespace envdiff::io {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::runtime_error("config key '" + key + "': invalid value '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config key '" + key + "': invalid value '" + value + "'");
}

std::string format_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", d);
  return buf;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"rule",     "seed",    "p0",         "steps",    "n_policies",
                                             "random_walk_frac", "len_min", "len_max", "strategy", "prefix_len",
                                             "rng_seed", "reps",    "grid",       "threads",  "n_estimator"};
  return keys;
}

RunConfig config_from_map(const std::map<std::string, std::string>& values, bool require_strategy) {
  for (const auto& [key, value] : values) {
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  if (!get("rule")) throw std::runtime_error("config: missing key 'rule'");
  if (require_strategy && !get("strategy")) throw std::runtime_error("config: missing key 'strategy'");

  RunConfig cfg;
  auto& e = cfg.experiment;
  auto with = [&](const std::string& key, auto apply) {
    if (const auto* v = get(key)) {
      try {
        apply(*v);
      } catch (const std::runtime_error&) {
        throw;
      } catch (const std::exception& ex) {
        throw std::runtime_error("config key '" + key + "': " + ex.what());
      }
    }
  };
  with("rule", [&](const std::string& v) { e.env.rule = eca::rule_from_number(parse_number<int>("rule", v)); });
  with("seed", [&](const std::string& v) { e.env.seed = eca::Configuration::parse(v); });
  with("p0", [&](const std::string& v) { e.env.p0 = parse_number<int>("p0", v); });
  with("steps", [&](const std::string& v) { e.steps = parse_number<int>("steps", v); });
  with("n_policies", [&](const std::string& v) { e.n_policies = parse_number<int>("n_policies", v); });
  with("random_walk_frac", [&](const std::string& v) { e.random_walk_frac = parse_double("random_walk_frac", v); });
  with("len_min", [&](const std::string& v) { e.len_min = parse_number<int>("len_min", v); });
  with("len_max", [&](const std::string& v) { e.len_max = parse_number<int>("len_max", v); });
  with("strategy", [&](const std::string& v) { e.strategy = experiment::parse_strategy(v); });
  with("prefix_len", [&](const std::string& v) { e.prefix_len = parse_number<int>("prefix_len", v); });
  with("rng_seed", [&](const std::string& v) { e.rng_seed = parse_number<std::uint64_t>("rng_seed", v); });
  with("threads", [&](const std::string& v) { e.threads = parse_number<int>("threads", v); });
  with("reps", [&](const std::string& v) { cfg.reps = parse_number<int>("reps", v); });
  with("grid", [&](const std::string& v) { cfg.grid = parse_number<int>("grid", v); });
  with("n_estimator", [&](const std::string& v) { cfg.n_estimator = curves::parse_n_estimator(v); });
  try {
    e.validate();
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("config: ") + ex.what());
  }
  if (cfg.reps < 1) throw std::runtime_error("config key 'reps': must be >= 1");
  if (cfg.grid < 2) throw std::runtime_error("config key 'grid': must be >= 2");
  return cfg;
}

RunConfig load_config(const fs::path& path, bool require_strategy) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return config_from_map(parse_key_values(in), require_strategy);
}

std::map<std::string, std::string> config_to_map(const RunConfig& config) {
  const auto& e = config.experiment;
  return {{"rule", std::to_string(e.env.rule.rule_number)},
          {"seed", e.env.seed.to_string()},
          {"p0", std::to_string(e.env.p0)},
          {"steps", std::to_string(e.steps)},
          {"n_policies", std::to_string(e.n_policies)},
          {"random_walk_frac", format_double(e.random_walk_frac)},
          {"len_min", std::to_string(e.len_min)},
          {"len_max", std::to_string(e.len_max)},
          {"strategy", std::string(experiment::to_string(e.strategy))},
          {"prefix_len", std::to_string(e.prefix_len)},
          {"rng_seed", std::to_string(e.rng_seed)},
          {"threads", std::to_string(e.threads)},
          {"reps", std::to_string(config.reps)},
          {"grid", std::to_string(config.grid)},
          {"n_estimator", std::string(curves::to_string(config.n_estimator))}};
}

std::string format_config(const RunConfig& config) {
  const auto values = config_to_map(config);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + values.at(key) + "\n";
  return out;
}

Manifest::Manifest(std::string command, std::map<std::string, std::string> settings)
    : command_(std::move(command)), settings_(std::move(settings)) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  created_ = buf;
}

void Manifest::emit(const fs::path& dir, const std::string& name, std::string_view content) {
  write_file_atomic(dir / name, content);
  files_.push_back({name, content.size(), sha256_hex(content)});
}

void Manifest::set_extra(const std::string& key, const std::string& value) { extra_[key] = value; }

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["created_utc"] = created_;
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  for (const auto& [k, v] : settings_) settings[k] = v;
  j["config"] = settings;
  j["compressor"] = {{"id", complexity::compressor_id()}, {"empty_baseline", complexity::empty_baseline()}};
  for (const auto& [k, v] : extra_) j[k] = v;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : files_) files.push_back({{"path", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  j["files"] = files;
  return j.dump(2) + "\n";
}

void Manifest::write(const fs::path& dir) const { write_file_atomic(dir / "manifest.json", to_json()); }

}  // namespace envdiff::io
