#pragma once

// Random-board model for n devices: every device k at slot t owns a uniform
// draw u_{k,t}, transmits iff u_{k,t} < f(history), and hears 1 if it was the
// sole transmitter, 2+ if another device also transmitted, 0 if it idled.
// Fixing the board couples every policy onto one sample space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contend2/analytic.hpp"
#include "contend2/core.hpp"
#include "contend2/error.hpp"
#include "contend2/parallel.hpp"
#include "contend2/rng.hpp"

namespace contend2 {

inline constexpr std::size_t kDefaultHorizon = 10000;

/// Materialized n x horizon grid of draws in [0, 1].
class RandomBoard {
 public:
  RandomBoard(std::size_t n, std::size_t horizon, std::vector<double> cells)
      : n_(n), horizon_(horizon), cells_(std::move(cells)) {
    if (n_ == 0) throw InvalidArgument("random board needs at least one device");
    if (cells_.size() != n_ * horizon_) throw InvalidArgument("random board: cell count mismatch");
    for (double u : cells_) {
      if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("random board: cell outside [0,1]");
    }
  }

  static RandomBoard from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidArgument("random board needs at least one row");
    const std::size_t horizon = rows.front().size();
    std::vector<double> cells;
    cells.reserve(rows.size() * horizon);
    for (const auto& r : rows) {
      if (r.size() != horizon) throw InvalidArgument("random board: ragged rows");
      cells.insert(cells.end(), r.begin(), r.end());
    }
    return RandomBoard(rows.size(), horizon, std::move(cells));
  }

  /// The board Monte Carlo trial `trial` sees under `seed`, cut to `horizon` slots.
  static RandomBoard generate(std::size_t n, std::size_t horizon, std::uint64_t seed,
                              std::uint64_t trial = 0) {
    const std::uint64_t stream = substream(seed, trial);
    std::vector<double> cells(n * horizon);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t t = 0; t < horizon; ++t) cells[k * horizon + t] = counter_uniform(stream, k, t);
    }
    return RandomBoard(n, horizon, std::move(cells));
  }

  std::size_t rows() const { return n_; }
  std::size_t horizon() const { return horizon_; }
  double operator()(std::size_t k, std::size_t t) const { return cells_[k * horizon_ + t]; }

 private:
  std::size_t n_;
  std::size_t horizon_;
  std::vector<double> cells_;
};

/// Board whose cells are computed on demand; identical to RandomBoard::generate
/// with the same (seed, trial).
struct CounterBoard {
  std::uint64_t stream;
  std::size_t n;
  std::size_t horizon_slots;

  CounterBoard(std::size_t devices, std::size_t horizon, std::uint64_t seed, std::uint64_t trial)
      : stream(substream(seed, trial)), n(devices), horizon_slots(horizon) {}

  std::size_t rows() const { return n; }
  std::size_t horizon() const { return horizon_slots; }
  double operator()(std::size_t k, std::size_t t) const { return counter_uniform(stream, k, t); }
};

enum class Decision : unsigned char { Idle, Transmit };

struct Deduction {
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::vector<Decision> decisions;         // row-major n x horizon
  std::vector<ChannelResponse> responses;  // row-major n x horizon
  std::vector<std::optional<long>> latencies;  // X_k, empty when Unfinished

  Decision decision(std::size_t k, std::size_t t) const { return decisions[k * horizon + t]; }
  ChannelResponse response(std::size_t k, std::size_t t) const { return responses[k * horizon + t]; }
  bool finished() const {
    return std::all_of(latencies.begin(), latencies.end(), [](const auto& x) { return x.has_value(); });
  }
};

namespace detail {

// Column-by-column deduction. With Record = false the run stops as soon as
// every device has succeeded and only latencies are filled in.
template <bool Record, class Board>
void run_deduction(const Board& board, const HistoryPolicy& policy, std::vector<History>& histories,
                   std::vector<Decision>& column, Deduction* trace, std::vector<std::optional<long>>& latencies) {
  const std::size_t n = board.rows();
  const std::size_t horizon = board.horizon();
  histories.resize(n);
  for (auto& h : histories) h.clear();
  column.assign(n, Decision::Idle);
  latencies.assign(n, std::nullopt);
  std::size_t remaining = n;
  for (std::size_t t = 0; t < horizon; ++t) {
    if constexpr (!Record) {
      if (remaining == 0) return;
    }
    std::size_t senders = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool send = board(k, t) < policy(histories[k]);
      column[k] = send ? Decision::Transmit : Decision::Idle;
      senders += send;
    }
    for (std::size_t k = 0; k < n; ++k) {
      ChannelResponse r = ChannelResponse::Silent;
      if (column[k] == Decision::Transmit) {
        r = senders == 1 ? ChannelResponse::Success : ChannelResponse::Collision;
      }
      if (r == ChannelResponse::Success) {
        latencies[k] = static_cast<long>(t) + 1;
        --remaining;
      }
      if constexpr (Record) {
        trace->decisions[k * horizon + t] = column[k];
        trace->responses[k * horizon + t] = r;
      }
      if (!histories[k].succeeded()) histories[k].append(r);
    }
  }
}

}  // namespace detail

template <class Board>
Deduction deduce(const Board& board, const HistoryPolicy& policy) {
  Deduction d;
  d.n = board.rows();
  d.horizon = board.horizon();
  d.decisions.assign(d.n * d.horizon, Decision::Idle);
  d.responses.assign(d.n * d.horizon, ChannelResponse::Silent);
  std::vector<History> histories;
  std::vector<Decision> column;
  detail::run_deduction<true>(board, policy, histories, column, &d, d.latencies);
  return d;
}

struct MonteCarloConfig {
  std::size_t n = 2;
  Objective objective = Objective::Avg;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t horizon = kDefaultHorizon;
  unsigned threads = 0;  // 0: hardware concurrency (capped by CONTEND2_THREADS)
};

struct MonteCarloResult {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal approximation
  std::uint64_t trials = 0;
  std::uint64_t unfinished_count = 0;

  bool trusted() const { return unfinished_count == 0; }
  CostReport report(Objective obj) const { return {obj, mean, Method::MonteCarlo, ci_halfwidth}; }
};

/// Throws HorizonExhausted unless every trial finished.
inline const MonteCarloResult& require_trusted(const MonteCarloResult& r) {
  if (!r.trusted()) {
    throw HorizonExhausted(std::to_string(r.unfinished_count) + " of " + std::to_string(r.trials) +
                           " trials left a device unfinished within the horizon");
  }
  return r;
}

namespace detail {

// Exact integer tallies: merging is associative, so the statistics do not
// depend on how trials are split across workers.
struct Tally {
  std::uint64_t count = 0;
  std::uint64_t unfinished = 0;
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;

  void merge(const Tally& o) {
    count += o.count;
    unfinished += o.unfinished;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

// Trial cost scaled to an integer: sum of latencies for Avg (divide by n),
// the min or max latency otherwise.
inline std::uint64_t scaled_cost(const std::vector<std::optional<long>>& x, Objective obj) {
  std::uint64_t acc = obj == Objective::Min ? UINT64_MAX : 0;
  for (const auto& v : x) {
    const auto u = static_cast<std::uint64_t>(*v);
    switch (obj) {
      case Objective::Avg: acc += u; break;
      case Objective::Min: acc = std::min(acc, u); break;
      case Objective::Max: acc = std::max(acc, u); break;
    }
  }
  return acc;
}

}  // namespace detail

/// Trial i runs on the board of substream (seed, i).
inline MonteCarloResult monte_carlo(const HistoryPolicy& policy, const MonteCarloConfig& cfg) {
  if (cfg.trials < 1) throw InvalidArgument("monte_carlo: trials must be >= 1");
  if (cfg.n < 1) throw InvalidArgument("monte_carlo: need at least one device");
  if (cfg.horizon < 1) throw InvalidArgument("monte_carlo: horizon must be >= 1");
  const long double worst = static_cast<long double>(cfg.n) * cfg.horizon;
  if (worst * worst * cfg.trials >= 1.8e19L) {
    throw InvalidArgument("monte_carlo: trials x (n x horizon)^2 overflows the 64-bit tally");
  }

  const unsigned workers = resolve_threads(cfg.threads);
  std::vector<detail::Tally> partial(workers);
  parallel_blocks(cfg.trials, workers, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<History> histories(cfg.n);
    for (auto& h : histories) h.reserve(64);
    std::vector<Decision> column;
    std::vector<std::optional<long>> latencies;
    detail::Tally tally;
    for (std::size_t i = begin; i < end; ++i) {
      const CounterBoard board(cfg.n, cfg.horizon, cfg.seed, i);
      detail::run_deduction<false>(board, policy, histories, column, nullptr, latencies);
      const bool done = std::all_of(latencies.begin(), latencies.end(),
                                    [](const auto& x) { return x.has_value(); });
      if (!done) {
        ++tally.unfinished;
        continue;
      }
      const std::uint64_t v = detail::scaled_cost(latencies, cfg.objective);
      ++tally.count;
      tally.sum += v;
      tally.sum_sq += v * v;
    }
    partial[w] = tally;
  });
  detail::Tally total;
  for (const auto& t : partial) total.merge(t);

  MonteCarloResult r;
  r.trials = cfg.trials;
  r.unfinished_count = total.unfinished;
  if (total.count == 0) return r;
  const long double scale = cfg.objective == Objective::Avg ? static_cast<long double>(cfg.n) : 1.0L;
  const long double cnt = static_cast<long double>(total.count);
  const long double s = static_cast<long double>(total.sum);
  const long double mean = s / cnt;
  r.mean = static_cast<double>(mean / scale);
  if (total.count > 1) {
    const long double var = (static_cast<long double>(total.sum_sq) - s * mean) / (cnt - 1.0L);
    r.ci_halfwidth = static_cast<double>(1.959963984540054L * std::sqrt(std::max(var, 0.0L) / cnt) / scale);
  }
  return r;
}

/// The restarted policy f*: behaves like `base` does on 0^k, where k counts
/// idle slots since the last collision (or the start).
inline HistoryPolicy restart_after_collision(HistoryPolicy base) {
  return HistoryPolicy(
      [base = std::move(base)](const History& h) {
        const std::size_t k = slots_since_restart(h);
        History fresh;
        fresh.reserve(k);
        for (std::size_t i = 0; i < k; ++i) fresh.append(ChannelResponse::Silent);
        return base(fresh);
      },
      "restarted");
}

struct DominanceResult {
  MonteCarloResult base;
  MonteCarloResult restarted;
};

/// Both policies run on the same boards (same seed and trial indices).
inline DominanceResult restart_dominance_check(const HistoryPolicy& base, MonteCarloConfig cfg) {
  cfg.n = 2;
  const HistoryPolicy restarted = restart_after_collision(base);
  return {monte_carlo(base, cfg), monte_carlo(restarted, cfg)};
}

}  // namespace contend2
