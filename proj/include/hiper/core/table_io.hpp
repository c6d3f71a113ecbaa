#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace hiper {

// Helpers for the text checkpoint formats: one table row per line, values in
// %.17g so they round-trip exactly. Readers throw FormatError.
void write_rows(std::ostream& out, std::span<const double> values, std::size_t row_len);
void read_values(std::istream& in, std::span<double> values, const std::string& what);
void expect_token(std::istream& in, const std::string& token);
int read_count(std::istream& in, const std::string& key);
void expect_end(std::istream& in);

}  // namespace hiper
