#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiper/core/types.hpp"

namespace hiper {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON object per turn. An episode ends at a line with "done":true or at a
// {"truncated":true,"final_state":N} sentinel. Optional extras: "malformed",
// "behavior" and, on the done line, "final_state".
void write_jsonl(std::ostream& out, const Trajectory& traj);
void write_jsonl(std::ostream& out, std::span<const Trajectory> trajs);
std::string to_jsonl(const Trajectory& traj);

// Throws FormatError naming the 1-based line on malformed input.
std::vector<Trajectory> read_jsonl(std::istream& in);

}  // namespace hiper
