#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

inline constexpr double kFormatPenalty = 0.1;

enum class Violation {
  kMissingBlock,
  kWrongOrder,
  kBadSwitchValue,
  kKeepAlteredSubgoal,
};

const char* to_string(Violation v);

struct ParsedDecision {
  Switch q = Switch::kSwitch;
  std::string subgoal_text;
  std::string action_text;

  bool operator==(const ParsedDecision&) const = default;
};

struct FormatVerdict {
  bool valid = true;
  std::vector<Violation> violations;
  double penalty = 0.0;

  void add(Violation v);
  bool has(Violation v) const;
};

class ParseFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseResult {
  ParsedDecision decision;
  FormatVerdict verdict;
};

// Reads the first <switch>, <subgoal> and <action> blocks. With prev_subgoal
// the turn is checked against the running subgoal: KEEP must copy it, and a
// missing switch block is inferred from whether the subgoal changed. Throws
// ParseFailure when no action block exists.
ParseResult parse_blocks(std::string_view text,
                         std::optional<std::string_view> prev_subgoal = std::nullopt);

std::string render(const ParsedDecision& d);

// Exact-string interning; ids are assigned in first-seen order.
class Vocabulary {
 public:
  int intern(const std::string& text);
  const std::vector<std::string>& names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

struct LogTurn {
  std::string text;
  double reward = 0.0;
  bool done = false;
  StateId state = 0;
  int line = 0;  // first line of the record, for diagnostics
};

struct LogEpisode {
  std::vector<LogTurn> turns;
  std::optional<StateId> final_state;
};

struct IngestedEpisode {
  Trajectory trajectory;
  std::vector<FormatVerdict> verdicts;
};

// Builds a trajectory from logged agent turns, interning subgoal and action
// strings. KEEP turns whose subgoal text differs from the running one are
// repaired to SWITCH; every malformed turn pays kFormatPenalty in reward while
// raw_reward keeps the logged value. Episodes that do not end with done are
// marked truncated.
IngestedEpisode ingest_log(const LogEpisode& episode, Vocabulary& subgoals, Vocabulary& actions);

// Transcript files: records separated by blank lines, one agent turn each.
// A record may open with header lines `reward: X`, `done: true|false` and
// `state: N`; everything after the headers is the agent text. A record that is
// exactly `---` closes the current episode, as does a turn with done true.
// `--- final_state: N` also names the state reached after a truncated episode.
std::vector<LogEpisode> read_transcript(std::istream& in);

}  // namespace hiper
