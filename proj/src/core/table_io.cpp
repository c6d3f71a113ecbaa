#include "hiper/core/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "hiper/core/trajectory_io.hpp"

namespace hiper {

void write_rows(std::ostream& out, std::span<const double> values, std::size_t row_len) {
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out << buf << ((i + 1) % row_len == 0 ? '\n' : ' ');
  }
}

void read_values(std::istream& in, std::span<double> values, const std::string& what) {
  for (double& v : values) {
    std::string tok;
    if (!(in >> tok)) throw FormatError("checkpoint truncated inside " + what);
    try {
      std::size_t used = 0;
      v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw FormatError("bad number '" + tok + "' in " + what);
    }
    if (!std::isfinite(v)) throw FormatError("non-finite value in " + what);
  }
}

void expect_token(std::istream& in, const std::string& token) {
  std::string got;
  if (!(in >> got) || got != token) {
    throw FormatError("checkpoint: expected '" + token + "', found '" + got + "'");
  }
}

int read_count(std::istream& in, const std::string& key) {
  expect_token(in, key);
  int n = 0;
  if (!(in >> n) || n < 1) throw FormatError("checkpoint: bad value for " + key);
  return n;
}

void expect_end(std::istream& in) {
  std::string extra;
  if (in >> extra) throw FormatError("checkpoint: trailing data '" + extra + "'");
}

}  // namespace hiper
