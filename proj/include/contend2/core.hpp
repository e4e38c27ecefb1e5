#pragma once

// Domain types shared by every other module: channel feedback, histories,
// recurrent policies given by a transmit-probability vector, and the
// idle-mass parametrization m_k = prod_{i<=k} (1 - p_i).

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "contend2/error.hpp"

namespace contend2 {

enum class ChannelResponse : unsigned char { Silent, Success, Collision };

enum class Objective { Avg, Min, Max };

inline std::string_view to_string(ChannelResponse r) {
  switch (r) {
    case ChannelResponse::Silent: return "0";
    case ChannelResponse::Success: return "1";
    case ChannelResponse::Collision: return "2+";
  }
  return "?";
}

inline std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::Avg: return "avg";
    case Objective::Min: return "min";
    case Objective::Max: return "max";
  }
  return "?";
}

inline Objective parse_objective(std::string_view s) {
  if (s == "avg" || s == "AVG") return Objective::Avg;
  if (s == "min" || s == "MIN") return Objective::Min;
  if (s == "max" || s == "MAX") return Objective::Max;
  throw InvalidArgument("unknown objective '" + std::string(s) + "' (expected avg, min or max)");
}

/// Word over {0, 1, 2+} seen by one device. Nothing may follow a Success.
class History {
 public:
  History() = default;
  History(std::initializer_list<ChannelResponse> word) {
    for (auto r : word) append(r);
  }

  void append(ChannelResponse r) {
    if (succeeded_) throw InvalidArgument("history: no symbol may follow a success");
    if (r == ChannelResponse::Success) succeeded_ = true;
    word_.push_back(r);
  }
  void clear() {
    word_.clear();
    succeeded_ = false;
  }
  void reserve(std::size_t n) { word_.reserve(n); }

  bool succeeded() const { return succeeded_; }
  std::size_t size() const { return word_.size(); }
  bool empty() const { return word_.empty(); }
  ChannelResponse operator[](std::size_t i) const { return word_[i]; }
  std::span<const ChannelResponse> word() const { return word_; }

  /// Parses whitespace-separated tokens "0", "1", "2+" (also "2").
  static History parse(std::string_view text) {
    History h;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) {
      if (tok == "0") {
        h.append(ChannelResponse::Silent);
      } else if (tok == "1") {
        h.append(ChannelResponse::Success);
      } else if (tok == "2+" || tok == "2") {
        h.append(ChannelResponse::Collision);
      } else {
        throw InvalidArgument("history: bad token '" + tok + "'");
      }
    }
    return h;
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < word_.size(); ++i) {
      if (i) out += ' ';
      out += to_string(word_[i]);
    }
    return out;
  }

 private:
  std::vector<ChannelResponse> word_;
  bool succeeded_ = false;
};

/// Transmit probabilities (p_0, ..., p_{L-1}) of a recurrent policy.
/// Entries lie in (0, 1] and the last one is exactly 1.
class ProbSequence {
 public:
  explicit ProbSequence(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidArgument("probability sequence must be non-empty");
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      const double p = probs_[k];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw InvalidArgument("probability p_" + std::to_string(k) + " = " + std::to_string(p) +
                              " is outside [0,1]");
      }
      if (p == 0.0) {
        throw InvalidArgument("probability p_" + std::to_string(k) +
                              " is 0; drop the entry instead");
      }
    }
    if (probs_.back() != 1.0) throw InvalidArgument("final probability must equal 1");
  }
  ProbSequence(std::initializer_list<double> probs) : ProbSequence(std::vector<double>(probs)) {}

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> values() const { return probs_; }

  friend bool operator==(const ProbSequence&, const ProbSequence&) = default;

 private:
  std::vector<double> probs_;
};

/// Idle masses (m_{-1}, m_0, ..., m_{L-1}) with m_{-1} = 1 > m_0 > ... > m_{L-1} = 0.
class MassSequence {
 public:
  explicit MassSequence(std::vector<double> masses) : masses_(std::move(masses)) {
    if (masses_.size() < 2) throw InvalidArgument("mass sequence needs at least (1, 0)");
    if (masses_.front() != 1.0) throw InvalidArgument("mass sequence must start with m_{-1} = 1");
    if (masses_.back() != 0.0) throw InvalidArgument("mass sequence must end with 0");
    for (std::size_t i = 1; i < masses_.size(); ++i) {
      const double m = masses_[i];
      if (!std::isfinite(m) || m < 0.0 || m > 1.0) {
        throw InvalidArgument("mass m_" + std::to_string(static_cast<long>(i) - 1) +
                              " is outside [0,1]");
      }
      if (!(m < masses_[i - 1])) {
        throw InvalidArgument("mass sequence is not strictly decreasing at m_" +
                              std::to_string(static_cast<long>(i) - 1));
      }
    }
  }
  MassSequence(std::initializer_list<double> masses)
      : MassSequence(std::vector<double>(masses)) {}

  /// Number of transmit probabilities L (one less than the stored count).
  std::size_t length() const { return masses_.size() - 1; }
  /// m_k for k in [-1, L-1].
  double mass(long k) const { return masses_[static_cast<std::size_t>(k + 1)]; }
  std::span<const double> values() const { return masses_; }

 private:
  std::vector<double> masses_;
};

inline MassSequence probs_to_masses(const ProbSequence& p) {
  std::vector<double> m;
  m.reserve(p.size() + 1);
  m.push_back(1.0);
  for (double pk : p.values()) m.push_back(m.back() * (1.0 - pk));
  return MassSequence(std::move(m));
}

inline ProbSequence masses_to_probs(const MassSequence& m) {
  const auto v = m.values();
  std::vector<double> p;
  p.reserve(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i) p.push_back(1.0 - v[i] / v[i - 1]);
  p.back() = 1.0;
  return ProbSequence(std::move(p));
}

/// Arbitrary proper policy: history -> transmit probability, forced to 0
/// once the history contains a Success.
class HistoryPolicy {
 public:
  using Rule = std::function<double(const History&)>;

  explicit HistoryPolicy(Rule rule, std::string name = "custom")
      : rule_(std::move(rule)), name_(std::move(name)) {}

  double operator()(const History& h) const {
    if (h.succeeded()) return 0.0;
    const double q = rule_(h);
    if (!(q >= 0.0 && q <= 1.0)) {
      throw InvalidArgument("policy '" + name_ + "' returned probability outside [0,1]");
    }
    return q;
  }

  const std::string& name() const { return name_; }

 private:
  Rule rule_;
  std::string name_;
};

/// Number of Silent symbols since the later of the start and the last Collision.
inline std::size_t slots_since_restart(const History& h) {
  std::size_t k = 0;
  for (std::size_t i = h.size(); i-- > 0;) {
    if (h[i] == ChannelResponse::Collision) break;
    ++k;
  }
  return k;
}

/// f*(w 2+ 0^k) = f*(0^k) = p_k.
inline HistoryPolicy recurrent_to_history_policy(const ProbSequence& p) {
  return HistoryPolicy(
      [p](const History& h) {
        const std::size_t k = slots_since_restart(h);
        // p_{L-1} = 1 forces a transmission, so the clock never reaches L.
        if (k >= p.size()) {
          throw UnreachableState("recurrent policy: " + std::to_string(k) +
                                 " idle slots since restart exceeds length " +
                                 std::to_string(p.size()));
        }
        return p[k];
      },
      "recurrent");
}

inline HistoryPolicy constant_policy(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("constant policy probability must be in (0,1]");
  return HistoryPolicy([q](const History&) { return q; }, "constant");
}

}  // namespace contend2
