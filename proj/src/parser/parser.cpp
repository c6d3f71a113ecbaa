#include "hiper/parser/parser.hpp"

#include <algorithm>
#include <array>

namespace hiper {

const char* to_string(Violation v) {
  switch (v) {
    case Violation::kMissingBlock: return "missing_block";
    case Violation::kWrongOrder: return "wrong_order";
    case Violation::kBadSwitchValue: return "bad_switch_value";
    case Violation::kKeepAlteredSubgoal: return "keep_altered_subgoal";
  }
  return "unknown";
}

void FormatVerdict::add(Violation v) {
  violations.push_back(v);
  valid = false;
  penalty = kFormatPenalty;
}

bool FormatVerdict::has(Violation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Block {
  bool found = false;
  std::size_t pos = 0;
  std::string_view body;
};

Block find_block(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto b = text.find(open);
  if (b == std::string_view::npos) return {};
  const auto body_start = b + open.size();
  const auto e = text.find(close, body_start);
  if (e == std::string_view::npos) return {};
  return {true, b, trim(text.substr(body_start, e - body_start))};
}

}  // namespace

ParseResult parse_blocks(std::string_view text, std::optional<std::string_view> prev_subgoal) {
  const Block sw = find_block(text, "switch");
  const Block sg = find_block(text, "subgoal");
  const Block ac = find_block(text, "action");
  if (!ac.found) throw ParseFailure("no <action> block");

  ParseResult r;
  for (const Block* b : {&sw, &sg}) {
    if (!b->found) r.verdict.add(Violation::kMissingBlock);
  }
  std::array<std::size_t, 3> order{};
  std::size_t n = 0;
  for (const Block* b : {&sw, &sg, &ac}) {
    if (b->found) order[n++] = b->pos;
  }
  if (!std::is_sorted(order.begin(), order.begin() + n)) r.verdict.add(Violation::kWrongOrder);

  r.decision.action_text = std::string(ac.body);
  if (sg.found) {
    r.decision.subgoal_text = std::string(sg.body);
  } else if (prev_subgoal) {
    r.decision.subgoal_text = std::string(*prev_subgoal);
  }
  const bool same_subgoal = prev_subgoal && r.decision.subgoal_text == *prev_subgoal;

  std::optional<Switch> q;
  if (sw.found) {
    if (sw.body == "SWITCH") {
      q = Switch::kSwitch;
    } else if (sw.body == "KEEP") {
      q = Switch::kKeep;
    } else {
      r.verdict.add(Violation::kBadSwitchValue);
    }
  }
  if (!q) q = same_subgoal ? Switch::kKeep : Switch::kSwitch;
  r.decision.q = *q;
  if (sw.found && *q == Switch::kKeep && prev_subgoal && !same_subgoal) {
    r.verdict.add(Violation::kKeepAlteredSubgoal);
  }
  return r;
}

std::string render(const ParsedDecision& d) {
  std::string out = "<switch>";
  out += d.q == Switch::kSwitch ? "SWITCH" : "KEEP";
  out += "</switch><subgoal>";
  out += d.subgoal_text;
  out += "</subgoal><action>";
  out += d.action_text;
  out += "</action>";
  return out;
}

int Vocabulary::intern(const std::string& text) {
  const auto it = ids_.find(text);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(names_.size());
  names_.push_back(text);
  ids_.emplace(text, id);
  return id;
}

IngestedEpisode ingest_log(const LogEpisode& episode, Vocabulary& subgoals, Vocabulary& actions) {
  if (episode.turns.empty()) throw ParseFailure("empty episode");
  IngestedEpisode out;
  Trajectory& traj = out.trajectory;
  std::optional<std::string> prev;
  for (std::size_t i = 0; i < episode.turns.size(); ++i) {
    const LogTurn& log = episode.turns[i];
    if (log.done && i + 1 != episode.turns.size()) {
      throw ParseFailure("line " + std::to_string(log.line) + ": done before the last turn");
    }
    ParseResult parsed;
    try {
      parsed = parse_blocks(log.text, prev ? std::optional<std::string_view>(*prev) : std::nullopt);
    } catch (const ParseFailure& e) {
      throw ParseFailure("line " + std::to_string(log.line) + ": " + e.what());
    }
    ParsedDecision& d = parsed.decision;
    if (d.q == Switch::kKeep && (!prev || d.subgoal_text != *prev)) {
      if (!parsed.verdict.has(Violation::kKeepAlteredSubgoal)) {
        parsed.verdict.add(Violation::kKeepAlteredSubgoal);
      }
      d.q = Switch::kSwitch;
    }

    TurnRecord turn;
    turn.t = static_cast<int>(i);
    turn.state = log.state;
    if (i > 0) turn.prev_subgoal = traj.turns.back().subgoal;
    turn.q = d.q;
    turn.subgoal = subgoals.intern(d.subgoal_text);
    turn.subgoal_text = d.subgoal_text;
    turn.action = actions.intern(d.action_text);
    turn.action_text = d.action_text;
    turn.raw_reward = log.reward;
    turn.reward = log.reward - parsed.verdict.penalty;
    turn.done = log.done;
    turn.malformed = !parsed.verdict.valid;
    traj.turns.push_back(turn);
    out.verdicts.push_back(std::move(parsed.verdict));
    prev = d.subgoal_text;
  }
  traj.truncated = !traj.turns.back().done;
  if (traj.truncated) traj.final_state = episode.final_state.value_or(traj.turns.back().state);
  validate(traj);
  return out;
}

}  // namespace hiper
