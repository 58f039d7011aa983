#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "stride/pipeline.hpp"

namespace stride::cli {

/// Bad flags, keys or values. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value settings for one command. Later sources override earlier ones:
/// config file, then --set, then dedicated flags.
class RunConfig {
 public:
  explicit RunConfig(std::set<std::string> allowed) : allowed_(std::move(allowed)) {}

  /// Parses "key = value" lines; '#' starts a comment. Unknown keys throw UsageError.
  void merge_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value);
  /// "key=value" as given to --set.
  void set_pair(const std::string& pair);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback = "") const;
  std::string required(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return kv_; }

 private:
  std::set<std::string> allowed_;
  std::map<std::string, std::string> kv_;
};

/// Keys that map onto PipelineConfig fields.
const std::set<std::string>& pipeline_keys();
/// Keys that describe the noise schedule (fixed at training time).
const std::set<std::string>& schedule_keys();

/// Applies every pipeline key present in `rc` to `base`.
PipelineConfig pipeline_config(const RunConfig& rc, PipelineConfig base = {});

}  // namespace stride::cli
