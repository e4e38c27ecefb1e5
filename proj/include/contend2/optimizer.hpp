#pragma once

// Direct numerical minimization of the closed-form costs over idle-mass
// sequences of a fixed length, without using the structure of the optimum.
//
// Projected coordinate descent: each free mass m_k (k = 0..L-2) is line-searched
// by golden section on (m_{k+1} + eps, m_{k-1} - eps) with the others held fixed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "contend2/analytic.hpp"
#include "contend2/core.hpp"
#include "contend2/error.hpp"
#include "contend2/parallel.hpp"
#include "contend2/rng.hpp"

namespace contend2 {

struct OptimizeConfig {
  Objective objective = Objective::Avg;
  int length = 3;  // L: number of transmit probabilities, masses m_0..m_{L-1}
  double tolerance = 1e-7;
  int max_iterations = 20000;  // coordinate sweeps per restart
  int restarts = 16;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;

  void validate() const {
    if (!(tolerance > 0.0)) throw InvalidArgument("optimize: tolerance must be positive");
    if (length < 1) throw InvalidArgument("optimize: length must be >= 1");
    if (restarts < 1) throw InvalidArgument("optimize: restarts must be >= 1");
    if (max_iterations < 1) throw InvalidArgument("optimize: max_iterations must be >= 1");
  }
};

struct OptimizeResult {
  MassSequence masses;
  double cost;
  double residual_max;  // projected first-order residual
  bool converged;       // false: max_iterations hit (NotConverged), best found reported
  bool at_boundary;     // some free mass pinned against a neighbour
  int iterations;
  int restart;          // index of the winning restart
};

inline constexpr double kBoxMargin = 1e-12;

/// Per free index k = 0..L-2, the first-order condition of the closed form:
///   Avg:  2 m_k - m_{k-1} - m_{k+1} - C,  C = -1 / (2 E X_1)
///   Max:  m_{k+1} - (2 - g) m_k + m_{k-1} - g,  g = 1 / E max
///   Min:  m_k - m_{k-1} / 2 (distance from the halving optimum)
inline std::vector<double> stationarity_residuals(const MassSequence& m, Objective obj) {
  const std::size_t free = m.length() - 1;
  std::vector<double> r;
  r.reserve(free);
  if (free == 0) return r;
  const long last = static_cast<long>(free);
  switch (obj) {
    case Objective::Avg: {
      const double c = -1.0 / (2.0 * expected_avg(m));
      for (long k = 0; k < last; ++k) r.push_back(2.0 * m.mass(k) - m.mass(k - 1) - m.mass(k + 1) - c);
      break;
    }
    case Objective::Max: {
      const double g = 1.0 / expected_max(m);
      for (long k = 0; k < last; ++k) {
        r.push_back(m.mass(k + 1) - (2.0 - g) * m.mass(k) + m.mass(k - 1) - g);
      }
      break;
    }
    case Objective::Min:
      for (long k = 0; k < last; ++k) r.push_back(m.mass(k) - 0.5 * m.mass(k - 1));
      break;
  }
  return r;
}

namespace detail {

// Closed-form cost on a raw (1, m_0, ..., 0) vector; +inf when degenerate.
inline double raw_cost(std::span<const double> v, Objective obj) {
  double s = 0.0, s2 = 0.0, jumps = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    s += v[i];
    s2 += v[i] * v[i];
    const double d = v[i] - v[i + 1];
    jumps += d * d;
  }
  const double den = 1.0 - jumps;
  if (den <= kDegenerateThreshold) return std::numeric_limits<double>::infinity();
  switch (obj) {
    case Objective::Avg: return s / den;
    case Objective::Min: return s2 / den;
    case Objective::Max: return (2.0 * s - s2) / den;
  }
  return std::numeric_limits<double>::infinity();
}

// Positive multiple of dE/dm_k for each free index, using the same sign as the
// true partial derivative.
inline std::vector<double> gradient_direction(std::span<const double> v, Objective obj) {
  const std::size_t free = v.size() - 2;
  std::vector<double> g(free);
  const double e = raw_cost(v, obj);
  for (std::size_t k = 0; k < free; ++k) {
    const double prev = v[k], cur = v[k + 1], next = v[k + 2];
    const double second = prev - 2.0 * cur + next;
    switch (obj) {
      case Objective::Avg: g[k] = -second + 1.0 / (2.0 * e); break;
      case Objective::Max: g[k] = (1.0 - cur) / e - second; break;
      case Objective::Min: g[k] = cur - e * second; break;
    }
  }
  return g;
}

// KKT residual: a coordinate pinned at a bound only counts if the gradient
// points back into the feasible box.
inline double projected_residual(std::span<const double> v, Objective obj) {
  const auto g = gradient_direction(v, obj);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double cur = v[k + 1];
    const bool at_lower = cur - v[k + 2] <= 1e-10;
    const bool at_upper = v[k] - cur <= 1e-10;
    double r = std::abs(g[k]);
    if (at_lower && g[k] >= 0.0) r = 0.0;
    if (at_upper && g[k] <= 0.0) r = 0.0;
    worst = std::max(worst, r);
  }
  return worst;
}

inline bool touches_boundary(std::span<const double> v) {
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] - v[i + 1] <= 1e-10 || v[i - 1] - v[i] <= 1e-10) return true;
  }
  return false;
}

// Minimizes cost over v[idx] in [lo, hi]; returns the best point probed.
inline double golden_section(std::vector<double>& v, std::size_t idx, double lo, double hi,
                             Objective obj) {
  constexpr double inv_phi = 0.6180339887498948482;
  auto eval = [&](double x) {
    v[idx] = x;
    return raw_cost(v, obj);
  };
  const double start = v[idx];
  double best_x = start, best_f = eval(start);
  auto consider = [&](double x, double f) {
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  consider(c, fc);
  consider(d, fd);
  consider(lo, eval(lo));
  consider(hi, eval(hi));
  v[idx] = best_x;
  return best_x;
}

inline std::vector<double> random_start(int length, std::uint64_t seed, int restart) {
  std::mt19937_64 gen(substream(seed, static_cast<std::uint64_t>(restart)));
  const std::size_t free = static_cast<std::size_t>(length) - 1;
  std::vector<double> inner;
  do {
    inner.clear();
    for (std::size_t i = 0; i < free; ++i) inner.push_back(to_unit(gen()));
    std::sort(inner.begin(), inner.end(), std::greater<>());
  } while (std::adjacent_find(inner.begin(), inner.end(), [](double x, double y) {
             return x - y <= 2 * kBoxMargin;
           }) != inner.end() ||
           (!inner.empty() && (inner.front() >= 1.0 - 2 * kBoxMargin || inner.back() <= 2 * kBoxMargin)));
  std::vector<double> v;
  v.reserve(free + 2);
  v.push_back(1.0);
  v.insert(v.end(), inner.begin(), inner.end());
  v.push_back(0.0);
  return v;
}

struct RestartOutcome {
  std::vector<double> masses;
  double cost;
  double residual;
  bool converged;
  int iterations;
};

inline RestartOutcome descend(const OptimizeConfig& cfg, int restart) {
  std::vector<double> v = random_start(cfg.length, cfg.seed, restart);
  const std::size_t free = v.size() - 2;
  if (free == 0) {
    const double cost = raw_cost(v, cfg.objective);
    return {std::move(v), cost, 0.0, true, 0};
  }
  bool converged = false;
  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (it < cfg.max_iterations) {
    ++it;
    double max_move = 0.0;
    for (std::size_t k = 1; k <= free; ++k) {
      const double lo = v[k + 1] + kBoxMargin;
      const double hi = v[k - 1] - kBoxMargin;
      const double before = v[k];
      golden_section(v, k, lo, hi, cfg.objective);
      max_move = std::max(max_move, std::abs(v[k] - before));
    }
    if (max_move < cfg.tolerance) {
      residual = projected_residual(v, cfg.objective);
      if (residual < 10.0 * cfg.tolerance) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) residual = projected_residual(v, cfg.objective);
  const double cost = raw_cost(v, cfg.objective);
  return {std::move(v), cost, residual, converged, it};
}

}  // namespace detail

/// Best of `restarts` seeded descents; ties broken toward the lower restart
/// index so the outcome does not depend on scheduling.
inline OptimizeResult optimize_masses(const OptimizeConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.restarts);
  std::vector<std::optional<detail::RestartOutcome>> outcomes(n);
  parallel_blocks(n, resolve_threads(cfg.threads), [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) outcomes[r] = detail::descend(cfg, static_cast<int>(r));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < n; ++r) {
    if (outcomes[r]->cost < outcomes[best]->cost) best = r;
  }
  auto& o = *outcomes[best];
  const bool boundary = detail::touches_boundary(o.masses);
  return {MassSequence(std::move(o.masses)), o.cost, o.residual, o.converged, boundary,
          o.iterations, static_cast<int>(best)};
}

struct SweepRow {
  int length;
  OptimizeResult result;
};

/// optimize_masses for each L in [l_min, l_max] with the other settings of `base`.
inline std::vector<SweepRow> sweep_lengths(Objective obj, int l_min, int l_max,
                                           OptimizeConfig base = {}) {
  if (l_min < 1 || l_max < l_min) throw InvalidArgument("sweep_lengths: empty length range");
  std::vector<SweepRow> rows;
  for (int L = l_min; L <= l_max; ++L) {
    OptimizeConfig cfg = base;
    cfg.objective = obj;
    cfg.length = L;
    rows.push_back({L, optimize_masses(cfg)});
  }
  return rows;
}

/// Row with the lowest cost; costs within `tie` of each other count as equal and
/// the shorter length wins (a longer sequence whose extra masses collapse onto
/// the boundary only reproduces a shorter optimum).
inline const SweepRow& best_length(const std::vector<SweepRow>& rows, double tie = 1e-9) {
  if (rows.empty()) throw InvalidArgument("best_length: no rows");
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) lowest = std::min(lowest, r.result.cost);
  for (const auto& r : rows) {
    if (r.result.cost <= lowest + tie) return r;
  }
  return rows.front();
}

}  // namespace contend2
