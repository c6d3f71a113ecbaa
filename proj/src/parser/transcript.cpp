#include <charconv>
#include <string>

#include "hiper/parser/parser.hpp"

namespace hiper {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseFailure("line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view text, int line, const char* key) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(line, std::string("bad value for ") + key + ": '" + std::string(text) + "'");
  }
  return value;
}

struct Record {
  int line = 0;
  std::vector<std::string> lines;
};

// A separator record: `---`, optionally followed by `final_state: N`.
bool is_separator(const Record& r, std::optional<StateId>& final_state) {
  if (r.lines.size() != 1) return false;
  std::string_view l = trim(r.lines[0]);
  if (l.substr(0, 3) != "---") return false;
  l = trim(l.substr(3));
  if (l.empty()) return true;
  constexpr std::string_view key = "final_state:";
  if (l.substr(0, key.size()) != key) fail(r.line, "unexpected text after ---");
  final_state = parse_number<int>(l.substr(key.size()), r.line, "final_state");
  return true;
}

LogTurn to_turn(const Record& r) {
  LogTurn turn;
  turn.line = r.line;
  std::size_t i = 0;
  for (; i < r.lines.size(); ++i) {
    const std::string_view l = trim(r.lines[i]);
    const auto colon = l.find(':');
    if (colon == std::string_view::npos) break;
    const std::string_view key = trim(l.substr(0, colon));
    const std::string_view value = trim(l.substr(colon + 1));
    const int line = r.line + static_cast<int>(i);
    if (key == "reward") {
      turn.reward = parse_number<double>(value, line, "reward");
    } else if (key == "done") {
      if (value == "true") {
        turn.done = true;
      } else if (value == "false") {
        turn.done = false;
      } else {
        fail(line, "done must be true or false");
      }
    } else if (key == "state") {
      turn.state = parse_number<int>(value, line, "state");
    } else {
      break;
    }
  }
  for (; i < r.lines.size(); ++i) {
    if (!turn.text.empty()) turn.text += '\n';
    turn.text += r.lines[i];
  }
  if (trim(turn.text).empty()) fail(r.line, "record has no agent text");
  return turn;
}

}  // namespace

std::vector<LogEpisode> read_transcript(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  int n = 0;
  Record current;
  auto flush = [&] {
    if (!current.lines.empty()) records.push_back(std::move(current));
    current = Record{};
  };
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (current.lines.empty()) current.line = n;
    current.lines.push_back(line);
  }
  flush();

  std::vector<LogEpisode> episodes;
  LogEpisode ep;
  for (const Record& r : records) {
    std::optional<StateId> final_state;
    if (is_separator(r, final_state)) {
      if (ep.turns.empty()) fail(r.line, "episode separator without turns");
      ep.final_state = final_state;
      episodes.push_back(std::move(ep));
      ep = LogEpisode{};
      continue;
    }
    if (!ep.turns.empty() && ep.turns.back().done) {
      episodes.push_back(std::move(ep));
      ep = LogEpisode{};
    }
    ep.turns.push_back(to_turn(r));
  }
  if (!ep.turns.empty()) episodes.push_back(std::move(ep));
  return episodes;
}

}  // namespace hiper
