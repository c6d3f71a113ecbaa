#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hiper/core/table_io.hpp"
#include "hiper/critic/critic.hpp"

namespace hiper {

void save_critic(std::ostream& out, const ValueTables& tables) {
  out << "hiper-critic v1\n";
  out << "states " << tables.num_states() << " subgoals " << tables.num_subgoals()
      << " slices " << tables.num_slices() << '\n';
  out << "high\n";
  write_rows(out, tables.high_values(), tables.num_states());
  out << "low\n";
  write_rows(out, tables.low_values(), tables.num_subgoals());
}

ValueTables load_critic(std::istream& in) {
  expect_token(in, "hiper-critic");
  expect_token(in, "v1");
  const int states = read_count(in, "states");
  const int subgoals = read_count(in, "subgoals");
  const int slices = read_count(in, "slices");
  ValueTables tables(states, subgoals, slices);
  expect_token(in, "high");
  read_values(in, tables.high_values(), "high table");
  expect_token(in, "low");
  read_values(in, tables.low_values(), "low table");
  expect_end(in);
  return tables;
}

void save_flat_critic(std::ostream& out, const FlatValueTable& table) {
  out << "hiper-flat-critic v1\n";
  out << "states " << table.num_states() << " slices " << table.num_slices() << '\n';
  out << "value\n";
  write_rows(out, table.values(), table.num_states());
}

FlatValueTable load_flat_critic(std::istream& in) {
  expect_token(in, "hiper-flat-critic");
  expect_token(in, "v1");
  const int states = read_count(in, "states");
  const int slices = read_count(in, "slices");
  FlatValueTable table(states, slices);
  expect_token(in, "value");
  read_values(in, table.values(), "value table");
  expect_end(in);
  return table;
}

namespace {

template <typename T, typename Save>
void save_to(const std::string& path, const T& value, Save save) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save(out, value);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

}  // namespace

void save_critic_file(const std::string& path, const ValueTables& tables) {
  save_to(path, tables, [](std::ostream& o, const ValueTables& t) { save_critic(o, t); });
}

ValueTables load_critic_file(const std::string& path) {
  auto in = open_in(path);
  return load_critic(in);
}

void save_flat_critic_file(const std::string& path, const FlatValueTable& table) {
  save_to(path, table,
          [](std::ostream& o, const FlatValueTable& t) { save_flat_critic(o, t); });
}

FlatValueTable load_flat_critic_file(const std::string& path) {
  auto in = open_in(path);
  return load_flat_critic(in);
}

}  // namespace hiper
