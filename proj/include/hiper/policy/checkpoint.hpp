#pragma once

#include <iosfwd>
#include <string>

#include "hiper/policy/tables.hpp"

namespace hiper {

void save_policy(std::ostream& out, const PolicyParams& params);
PolicyParams load_policy(std::istream& in);

void save_policy_file(const std::string& path, const PolicyParams& params);
PolicyParams load_policy_file(const std::string& path);


}  // namespace hiper
