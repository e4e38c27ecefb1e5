#pragma once

// CSV layout for boards and deduction traces: one row per device, one column
// per slot. Trace cells read "send,2+", "send*,1" or "idle,0" and are quoted.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "contend2/error.hpp"
#include "contend2/simulator.hpp"

namespace contend2 {

inline void write_board_csv(std::ostream& out, const RandomBoard& board, std::size_t max_slots = SIZE_MAX) {
  const std::size_t cols = std::min(board.horizon(), max_slots);
  std::ostringstream buf;
  buf.precision(17);
  for (std::size_t k = 0; k < board.rows(); ++k) {
    for (std::size_t t = 0; t < cols; ++t) {
      if (t) buf << ',';
      buf << board(k, t);
    }
    buf << '\n';
  }
  out << buf.str();
}

inline RandomBoard read_board_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw InvalidArgument("board csv: bad cell '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return RandomBoard::from_rows(rows);
}

inline std::string trace_cell(Decision d, ChannelResponse r) {
  if (d == Decision::Idle) return "idle,0";
  return r == ChannelResponse::Success ? "send*,1" : "send,2+";
}

inline void write_trace_csv(std::ostream& out, const Deduction& d, std::size_t max_slots = SIZE_MAX) {
  const std::size_t cols = std::min(d.horizon, max_slots);
  for (std::size_t k = 0; k < d.n; ++k) {
    for (std::size_t t = 0; t < cols; ++t) {
      if (t) out << ',';
      out << '"' << trace_cell(d.decision(k, t), d.response(k, t)) << '"';
    }
    out << '\n';
  }
}

}  // namespace contend2
