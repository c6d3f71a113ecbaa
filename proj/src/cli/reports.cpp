#include "hiper/cli/reports.hpp"

#include <cstdio>

namespace hiper {

using nlohmann::json;

namespace {

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

json variance_row(const VarianceReport& v) {
  return {{"t", v.t},
          {"samples", v.samples},
          {"attempts", v.attempts},
          {"var_low", v.var_low},
          {"var_flat", v.var_flat},
          {"diff", v.diff},
          {"ci_low", interval(v.ci_low)},
          {"ci_flat", interval(v.ci_flat)},
          {"ci_diff", interval(v.ci_diff)}};
}

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

json to_json(const TelescopeReport& r) {
  json j = {{"check", "telescope"},
            {"passed", r.passed()},
            {"trials", r.trials},
            {"tolerance", r.tolerance},
            {"low", {{"checked", r.low_checked}, {"max_abs_dev", r.max_dev_low},
                     {"passed", r.passed_low()}}},
            {"high", {{"checked", r.high_checked}, {"max_abs_dev", r.max_dev_high},
                      {"passed", r.passed_high()}}}};
  if (r.switching) {
    j["switch"] = {{"occurrences", r.switching->occurrences},
                   {"contexts", r.switching->contexts},
                   {"max_abs_dev", r.switching->max_deviation},
                   {"passed", r.passed_switch()}};
  }
  return j;
}

json to_json(const UnbiasednessReport& r) {
  json j = {{"check", "unbiased"},
            {"passed", r.passed()},
            {"samples", r.samples},
            {"coordinates", r.coordinates},
            {"failures", r.failures},
            {"zero_se_failures", r.zero_se_failures},
            {"gate_se", 4.0},
            {"max_z", r.max_z},
            {"max_abs_diff", r.max_abs_diff},
            {"oracle_norm", r.oracle_norm}};
  auto as_array = [](const GradTables& g) {
    auto v = g.values();
    return json(std::vector<double>(v.begin(), v.end()));
  };
  j["oracle"] = as_array(r.oracle);
  j["mean"] = as_array(r.mean);
  j["std_error"] = as_array(r.std_error);
  if (r.learned_max_z) {
    j["learned_critic"] = {{"max_z", *r.learned_max_z},
                           {"max_abs_bias", r.learned_max_abs_bias.value_or(0.0)}};
  }
  return j;
}

json to_json(const VarianceCheckReport& r) {
  json strict = json::array();
  for (std::size_t i = 0; i < r.strict.size(); ++i) {
    json row = variance_row(r.strict[i]);
    if (i < r.exact_low.size()) {
      row["exact_var_low"] = r.exact_low[i];
      row["exact_var_flat"] = r.exact_flat[i];
    }
    row["passed"] = r.strict[i].ci_diff.hi <= 0.0;
    strict.push_back(row);
  }
  json eq = variance_row(r.equality);
  eq["overlap"] = r.equality_overlap;
  return {{"check", "variance"},
          {"passed", r.passed()},
          {"seeds", r.seeds},
          {"strict_passed", r.strict_passed},
          {"strict", strict},
          {"equality", eq}};
}

json to_json(const GradcheckReport& r) {
  return {{"check", "gradcheck"},
          {"passed", r.passed()},
          {"configurations", r.configurations},
          {"tolerance", {{"relative", 1e-6}, {"absolute", 1e-9}}},
          {"log_prob", {{"coordinates", r.logprob_coords}, {"failures", r.logprob_failures},
                        {"max_abs_err", r.max_logprob_err}}},
          {"loss", {{"coordinates", r.loss_coords}, {"failures", r.loss_failures},
                    {"max_abs_err", r.max_loss_err}}},
          {"oracle_gradient", {{"configurations", r.oracle_configurations},
                               {"failures", r.oracle_failures},
                               {"max_abs_err", r.max_oracle_err}}},
          {"score_identity_max", r.score_identity_max}};
}

json to_json(const CriticFixpointReport& r) {
  auto opt = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  return {{"check", "critic-fixpoint"},
          {"passed", r.passed()},
          {"epochs_run", r.epochs_run},
          {"tolerance", r.tolerance},
          {"converged_epoch", opt(r.converged_epoch)},
          {"flat_converged_epoch", opt(r.flat_converged_epoch)},
          {"sup_high", r.sup_high},
          {"sup_low", r.sup_low},
          {"sup_flat", r.sup_flat},
          {"monotone_residual", r.monotone}};
}

std::string summary(const TelescopeReport& r) {
  std::string s = format("telescope %s: %d trajectories, low max dev %.3g (%ld turns), high max dev %.3g (%ld segments)",
                         verdict(r.passed()), r.trials, r.max_dev_low, r.low_checked,
                         r.max_dev_high, r.high_checked);
  if (r.switching) {
    s += format(", switch max dev %.3g over %d contexts", r.switching->max_deviation,
                r.switching->contexts);
  }
  return s;
}

std::string summary(const UnbiasednessReport& r) {
  return format("unbiased %s: N=%d, %d/%d coordinates outside 4 SE (%d with zero sample SE), "
                "max z %.2f, max |diff| %.3g",
                verdict(r.passed()), r.samples, r.failures, r.coordinates, r.zero_se_failures,
                r.max_z, r.max_abs_diff);
}

std::string summary(const VarianceCheckReport& r) {
  int failing = 0;
  for (const auto& v : r.strict) failing += v.ci_diff.hi > 0.0 ? 1 : 0;
  return format("variance %s: %zu seed-turn cells, %d with CI upper bound above 0; equality case overlap %s",
                verdict(r.passed()), r.strict.size(), failing,
                r.equality_overlap ? "yes" : "no");
}

std::string summary(const GradcheckReport& r) {
  return format("gradcheck %s: %d configs, log-prob %d/%ld failures, loss %d/%ld failures, oracle %d failures, score identity %.3g",
                verdict(r.passed()), r.configurations, r.logprob_failures, r.logprob_coords,
                r.loss_failures, r.loss_coords, r.oracle_failures, r.score_identity_max);
}

std::string summary(const CriticFixpointReport& r) {
  return format("critic-fixpoint %s: heads within %.0e at epoch %d, flat at epoch %d; sup errors %.3g/%.3g/%.3g",
                verdict(r.passed()), r.tolerance, r.converged_epoch.value_or(-1),
                r.flat_converged_epoch.value_or(-1), r.sup_high, r.sup_low, r.sup_flat);
}

}  // namespace hiper
