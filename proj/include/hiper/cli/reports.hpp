#pragma once

#include <string>

#include "json.hpp"

#include "hiper/oracle/checks.hpp"

namespace hiper {

// Machine-readable verification reports. Every object carries "check" and a
// boolean "passed".
nlohmann::json to_json(const TelescopeReport& r);
nlohmann::json to_json(const UnbiasednessReport& r);
nlohmann::json to_json(const VarianceCheckReport& r);
nlohmann::json to_json(const GradcheckReport& r);
nlohmann::json to_json(const CriticFixpointReport& r);

// One-line human summaries.
std::string summary(const TelescopeReport& r);
std::string summary(const UnbiasednessReport& r);
std::string summary(const VarianceCheckReport& r);
std::string summary(const GradcheckReport& r);
std::string summary(const CriticFixpointReport& r);

}  // namespace hiper
