#include "hiper/core/trajectory_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace hiper {

using nlohmann::json;

namespace {

json turn_to_json(const TurnRecord& turn) {
  json j;
  j["t"] = turn.t;
  j["state"] = turn.state;
  j["prev_subgoal"] = turn.prev_subgoal ? json(*turn.prev_subgoal) : json(nullptr);
  j["q"] = as_int(turn.q);
  j["subgoal"] = turn.subgoal;
  j["subgoal_text"] = turn.subgoal_text ? json(*turn.subgoal_text) : json(nullptr);
  j["action"] = turn.action;
  if (turn.action_text) j["action_text"] = *turn.action_text;
  j["reward"] = turn.reward;
  j["raw_reward"] = turn.raw_reward;
  j["done"] = turn.done;
  if (turn.malformed) j["malformed"] = true;
  if (turn.behavior) {
    const BehaviorRecord& b = *turn.behavior;
    json jb;
    jb["lp_switch"] = b.lp_switch ? json(*b.lp_switch) : json(nullptr);
    jb["lp_high"] = b.lp_high ? json(*b.lp_high) : json(nullptr);
    jb["lp_low"] = b.lp_low;
    jb["beta"] = b.beta;
    j["behavior"] = jb;
  }
  return j;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

TurnRecord turn_from_json(const json& j) {
  TurnRecord turn;
  turn.t = j.at("t").get<int>();
  turn.state = j.at("state").get<int>();
  turn.prev_subgoal = optional_field<int>(j, "prev_subgoal");
  const int q = j.at("q").get<int>();
  if (q != 0 && q != 1) throw FormatError("q must be 0 or 1");
  turn.q = q == 1 ? Switch::kSwitch : Switch::kKeep;
  turn.subgoal = j.at("subgoal").get<int>();
  turn.subgoal_text = optional_field<std::string>(j, "subgoal_text");
  turn.action = j.at("action").get<int>();
  turn.action_text = optional_field<std::string>(j, "action_text");
  turn.reward = j.at("reward").get<double>();
  turn.raw_reward = j.at("raw_reward").get<double>();
  turn.done = j.at("done").get<bool>();
  turn.malformed = j.value("malformed", false);
  if (auto it = j.find("behavior"); it != j.end() && !it->is_null()) {
    BehaviorRecord b;
    b.lp_switch = optional_field<double>(*it, "lp_switch");
    b.lp_high = optional_field<double>(*it, "lp_high");
    b.lp_low = it->at("lp_low").get<double>();
    b.beta = it->at("beta").get<double>();
    turn.behavior = b;
  }
  return turn;
}

}  // namespace

void write_jsonl(std::ostream& out, const Trajectory& traj) {
  for (const TurnRecord& turn : traj.turns) {
    json j = turn_to_json(turn);
    if (turn.done && traj.final_state) j["final_state"] = *traj.final_state;
    out << j.dump() << '\n';
  }
  if (!traj.terminated()) {
    json s;
    s["truncated"] = true;
    s["final_state"] = traj.final_state ? json(*traj.final_state) : json(nullptr);
    out << s.dump() << '\n';
  }
}

void write_jsonl(std::ostream& out, std::span<const Trajectory> trajs) {
  for (const Trajectory& traj : trajs) write_jsonl(out, traj);
}

std::string to_jsonl(const Trajectory& traj) {
  std::ostringstream os;
  write_jsonl(os, traj);
  return os.str();
}

std::vector<Trajectory> read_jsonl(std::istream& in) {
  std::vector<Trajectory> out;
  Trajectory current;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("truncated", false)) {
        if (current.turns.empty()) throw FormatError("truncation sentinel with no turns");
        current.truncated = true;
        current.final_state = optional_field<int>(j, "final_state");
        validate(current);
        out.push_back(std::move(current));
        current = Trajectory{};
        continue;
      }
      current.turns.push_back(turn_from_json(j));
      if (current.turns.back().done) {
        current.final_state = optional_field<int>(j, "final_state");
        validate(current);
        out.push_back(std::move(current));
        current = Trajectory{};
      }
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!current.turns.empty()) {
    throw FormatError("line " + std::to_string(lineno) +
                      ": episode ends without done or truncation sentinel");
  }
  return out;
}

}  // namespace hiper
