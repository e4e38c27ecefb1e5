#pragma once

// Policy files: a JSON array of transmit probabilities such as [0.5, 1.0],
// or the object printed by `contend2 protocol`:
//   {"schedule": "recurrent", "probs": [...]}  or  {"schedule": "constant", "probs": [q]}

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "contend2/analytic.hpp"
#include "contend2/core.hpp"
#include "contend2/error.hpp"

namespace contend2 {

using PolicySpec = std::variant<ProbSequence, ConstantPolicy>;

inline constexpr double kUnitClamp = 1e-12;

inline ProbSequence prob_sequence_from_values(std::vector<double> probs) {
  for (double& p : probs) {
    if (std::abs(p - 1.0) <= kUnitClamp) p = 1.0;
  }
  return ProbSequence(std::move(probs));
}

inline PolicySpec policy_from_json(const nlohmann::json& j) {
  auto numbers = [](const nlohmann::json& arr) {
    if (!arr.is_array()) throw InvalidArgument("policy: expected a JSON array of numbers");
    std::vector<double> v;
    for (const auto& x : arr) {
      if (!x.is_number()) throw InvalidArgument("policy: non-numeric entry " + x.dump());
      v.push_back(x.get<double>());
    }
    return v;
  };
  if (j.is_array()) return prob_sequence_from_values(numbers(j));
  if (j.is_object() && j.contains("probs")) {
    auto v = numbers(j.at("probs"));
    const std::string schedule = j.value("schedule", std::string("recurrent"));
    if (schedule == "constant") {
      if (v.size() != 1) throw InvalidArgument("policy: constant schedule takes exactly one probability");
      if (!(v[0] > 0.0 && v[0] <= 1.0)) throw InvalidArgument("policy: constant probability must be in (0,1]");
      return ConstantPolicy{v[0]};
    }
    if (schedule != "recurrent") throw InvalidArgument("policy: unknown schedule '" + schedule + "'");
    return prob_sequence_from_values(std::move(v));
  }
  throw InvalidArgument("policy: expected an array or an object with \"probs\"");
}

inline PolicySpec parse_policy(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("policy: invalid JSON: ") + e.what());
  }
  return policy_from_json(j);
}

inline PolicySpec load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("policy: cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_policy(text);
}

inline HistoryPolicy to_history_policy(const PolicySpec& spec) {
  if (const auto* p = std::get_if<ProbSequence>(&spec)) return recurrent_to_history_policy(*p);
  return constant_policy(std::get<ConstantPolicy>(spec).probability);
}

}  // namespace contend2
