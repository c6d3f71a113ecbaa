#include "hiper/policy/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hiper/core/table_io.hpp"

namespace hiper {

void save_policy(std::ostream& out, const PolicyParams& params) {
  const PolicyShape& sh = params.shape();
  out << "hiper-policy v1\n";
  out << "states " << sh.states << " subgoals " << sh.subgoals << " actions " << sh.actions
      << '\n';
  auto v = params.values();
  out << "switch\n";
  write_rows(out, v.subspan(0, sh.switch_size()), 2);
  out << "subgoal\n";
  write_rows(out, v.subspan(sh.switch_size(), sh.subgoal_size()), sh.subgoals);
  out << "action\n";
  write_rows(out, v.subspan(sh.switch_size() + sh.subgoal_size()), sh.actions);
}

PolicyParams load_policy(std::istream& in) {
  expect_token(in, "hiper-policy");
  expect_token(in, "v1");
  PolicyShape sh;
  sh.states = read_count(in, "states");
  sh.subgoals = read_count(in, "subgoals");
  sh.actions = read_count(in, "actions");
  PolicyParams params(sh);
  auto v = params.values();
  expect_token(in, "switch");
  read_values(in, v.subspan(0, sh.switch_size()), "switch table");
  expect_token(in, "subgoal");
  read_values(in, v.subspan(sh.switch_size(), sh.subgoal_size()), "subgoal table");
  expect_token(in, "action");
  read_values(in, v.subspan(sh.switch_size() + sh.subgoal_size()), "action table");
  expect_end(in);
  return params;
}

void save_policy_file(const std::string& path, const PolicyParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_policy(out, params);
}

PolicyParams load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_policy(in);
}

}  // namespace hiper
