#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiper/trainer/config.hpp"

namespace hiper {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  PPOConfig ppo;
  EnvSpec env;
  std::string out_dir = ".";
};

// `key = value` lines; `#` starts a comment. Absent keys keep their defaults.
// Throws ConfigError with the line number on malformed lines and unknown keys,
// and naming the key on out-of-range values.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Sets one key; throws ConfigError naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Range checks for every field; throws ConfigError naming the key.
void validate(const RunConfig& cfg);

// The recognised keys, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace hiper
