#include "hiper/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace hiper {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"gamma", [](RunConfig& c, auto& k, auto& v) { c.ppo.gae.gamma = to_double(k, v); }},
      {"lambda_low", [](RunConfig& c, auto& k, auto& v) { c.ppo.gae.lambda_low = to_double(k, v); }},
      {"lambda_high",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.gae.lambda_high = to_double(k, v); }},
      {"lambda_flat",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.gae.lambda_flat = to_double(k, v); }},
      {"whiten",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "off") {
           c.ppo.gae.whiten = Whitening::kOff;
         } else if (v == "per-level") {
           c.ppo.gae.whiten = Whitening::kPerLevel;
         } else {
           throw ConfigError(k + ": expected off or per-level, got '" + v + "'");
         }
       }},
      {"clip_eps", [](RunConfig& c, auto& k, auto& v) { c.ppo.clip_eps = to_double(k, v); }},
      {"c_v", [](RunConfig& c, auto& k, auto& v) { c.ppo.c_v = to_double(k, v); }},
      {"kl_beta", [](RunConfig& c, auto& k, auto& v) { c.ppo.kl_beta = to_double(k, v); }},
      {"c_keep", [](RunConfig& c, auto& k, auto& v) { c.ppo.c_keep = to_double(k, v); }},
      {"lr_actor", [](RunConfig& c, auto& k, auto& v) { c.ppo.lr_actor = to_double(k, v); }},
      {"lr_critic", [](RunConfig& c, auto& k, auto& v) { c.ppo.lr_critic = to_double(k, v); }},
      {"epochs", [](RunConfig& c, auto& k, auto& v) { c.ppo.epochs = static_cast<int>(to_int(k, v)); }},
      {"minibatch",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.minibatch = static_cast<int>(to_int(k, v)); }},
      {"iterations",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.iterations = static_cast<int>(to_int(k, v)); }},
      {"episodes_per_iter",
       [](RunConfig& c, auto& k, auto& v) {
         c.ppo.episodes_per_iter = static_cast<int>(to_int(k, v));
       }},
      {"eval_episodes",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.eval_episodes = static_cast<int>(to_int(k, v)); }},
      {"critic_epochs",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.critic_epochs = static_cast<int>(to_int(k, v)); }},
      {"critic_time_index",
       [](RunConfig& c, auto& k, auto& v) { c.ppo.critic_time_index = to_bool(k, v); }},
      {"checkpoint_every",
       [](RunConfig& c, auto& k, auto& v) {
         c.ppo.checkpoint_every = static_cast<int>(to_int(k, v));
       }},
      {"env", [](RunConfig& c, auto&, auto& v) { c.env.name = v; }},
      {"env.L", [](RunConfig& c, auto& k, auto& v) { c.env.length = static_cast<int>(to_int(k, v)); }},
      {"env.H", [](RunConfig& c, auto& k, auto& v) { c.env.horizon = static_cast<int>(to_int(k, v)); }},
      {"n_options",
       [](RunConfig& c, auto& k, auto& v) { c.env.n_options = static_cast<int>(to_int(k, v)); }},
      {"seed",
       [](RunConfig& c, auto& k, auto& v) {
         const long long s = to_int(k, v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         c.ppo.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

void validate(const RunConfig& cfg) {
  try {
    cfg.ppo.validate();
    cfg.env.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace hiper
