#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "onnsim/device.hpp"
#include "onnsim/errors.hpp"
#include "onnsim/random.hpp"

namespace onnsim {

// Symmetric sign matrix with zero diagonal: +1 pulls a pair toward
// in-phase lock, -1 toward anti-phase, 0 leaves them uncoupled.
struct CouplingMatrix {
  int n = 0;
  std::vector<int> w;  // row-major n*n

  explicit CouplingMatrix(int n_neurons = 0)
      : n(n_neurons), w(static_cast<std::size_t>(n_neurons) * static_cast<std::size_t>(n_neurons), 0) {}

  int at(int i, int j) const { return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
  void set(int i, int j, int v) {
    w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = v;
    w[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = v;
  }
};

inline void validate(const CouplingMatrix& m) {
  if (m.n < 0 || m.w.size() != static_cast<std::size_t>(m.n) * static_cast<std::size_t>(m.n))
    throw std::invalid_argument("coupling matrix: size mismatch");
  for (int i = 0; i < m.n; ++i) {
    if (m.at(i, i) != 0) throw std::invalid_argument("coupling matrix: diagonal must be zero");
    for (int j = 0; j < m.n; ++j) {
      const int v = m.at(i, j);
      if (v < -1 || v > 1) throw std::invalid_argument("coupling matrix: entries must be -1, 0 or +1");
      if (v != m.at(j, i)) throw std::invalid_argument("coupling matrix: must be symmetric");
    }
  }
}

// Sign-of-sum Hebbian rule over a set of +/-1 patterns.
inline CouplingMatrix hebbian_weights(const std::vector<std::vector<int>>& patterns) {
  if (patterns.empty()) throw std::invalid_argument("hebbian_weights: need at least one pattern");
  const auto n = patterns.front().size();
  for (const auto& p : patterns) {
    if (p.size() != n) throw std::invalid_argument("hebbian_weights: patterns must share a length");
    for (int v : p)
      if (v != 1 && v != -1) throw std::invalid_argument("hebbian_weights: pixels must be +1 or -1");
  }
  CouplingMatrix m(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      int acc = 0;
      for (const auto& p : patterns) acc += p[i] * p[j];
      m.set(static_cast<int>(i), static_cast<int>(j), (acc > 0) - (acc < 0));
    }
  }
  return m;
}

// Each pairwise connection occupies two crosspoints; full coupling of n
// oscillators therefore needs n*(n-1) cells.
inline int coupled_crosspoint_count(const CouplingMatrix& m) {
  int pairs = 0;
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j)
      if (m.at(i, j) != 0) ++pairs;
  return 2 * pairs;
}

enum class CrosspointRole { coupled, redundant, unused };

inline const char* to_string(CrosspointRole r) {
  switch (r) {
    case CrosspointRole::coupled: return "coupled";
    case CrosspointRole::redundant: return "redundant";
    default: return "unused";
  }
}

enum class PairWiring { none, symmetric, asymmetric };

inline const char* to_string(PairWiring w) {
  switch (w) {
    case PairWiring::symmetric: return "symmetric";
    case PairWiring::asymmetric: return "asymmetric";
    default: return "none";
  }
}

// One array position. Row and column wires belong to whole oscillators;
// which tap a wire presents at this position is routed in the periphery,
// so the tap choice lives here rather than on the wire.
struct Crosspoint {
  int row = 0;
  int col = 0;
  CrosspointRole role = CrosspointRole::unused;
  int neuron_row = -1;  // oscillator owning the row wire, -1 if spare
  int neuron_col = -1;  // oscillator owning the column wire, -1 if spare
  int row_tap_stage = 0;  // 1-based ring stage presented on the row side
  int col_tap_stage = 0;
  PairWiring wiring = PairWiring::none;
};

struct CrossbarLayout {
  int rows = 0;
  int cols = 0;
  int n_neurons = 0;
  std::vector<Crosspoint> points;  // row-major rows*cols

  const Crosspoint& at(int r, int c) const {
    return points[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
};

// Deterministic placement: oscillator k owns row k and column k. A nonzero
// pair (i, j) lands at (i, j) and (j, i). In-phase pairs tie like taps
// together at both positions; anti-phase pairs swap the taps so the two
// positions pull in opposite directions and the pair settles half a cycle
// apart. Everything else in the grid stays unformed: positions between two
// owned wires are redundant cells, positions touching a spare wire are
// unused and never see the circuit.
inline CrossbarLayout map_to_crossbar(const CouplingMatrix& m, const std::array<int, 2>& tap_stages,
                                      int min_rows = 5, int min_cols = 5) {
  validate(m);
  const int grid_r = std::max(min_rows, m.n);
  const int grid_c = std::max(min_cols, m.n);
  CrossbarLayout lay;
  lay.rows = grid_r;
  lay.cols = grid_c;
  lay.n_neurons = m.n;
  lay.points.reserve(static_cast<std::size_t>(grid_r) * static_cast<std::size_t>(grid_c));
  const int tap_a = tap_stages[0];
  const int tap_b = tap_stages[1];
  for (int r = 0; r < grid_r; ++r) {
    for (int c = 0; c < grid_c; ++c) {
      Crosspoint pt;
      pt.row = r;
      pt.col = c;
      pt.neuron_row = r < m.n ? r : -1;
      pt.neuron_col = c < m.n ? c : -1;
      if (pt.neuron_row < 0 || pt.neuron_col < 0) {
        pt.role = CrosspointRole::unused;
      } else if (r != c && m.at(r, c) != 0) {
        pt.role = CrosspointRole::coupled;
        pt.wiring = m.at(r, c) > 0 ? PairWiring::symmetric : PairWiring::asymmetric;
        if (pt.wiring == PairWiring::symmetric) {
          // Like taps tied at both positions: (a_i, a_j) and (b_j, b_i).
          const bool upper = r < c;
          pt.row_tap_stage = upper ? tap_a : tap_b;
          pt.col_tap_stage = upper ? tap_a : tap_b;
        } else {
          // Swapped taps: (a_i, b_j) and (a_j, b_i). The two positions
          // prefer offsets on opposite sides of half a cycle, and their
          // compromise pins the pair at exactly half.
          pt.row_tap_stage = tap_a;
          pt.col_tap_stage = tap_b;
        }
      } else {
        pt.role = CrosspointRole::redundant;
        pt.row_tap_stage = tap_a;
        pt.col_tap_stage = tap_b;
      }
      lay.points.push_back(pt);
    }
  }
  return lay;
}

inline std::string cell_id(int row, int col) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%dc%d", row, col);
  return buf;
}

// Physical array: every position holds a 1T1R, formed or not.
struct CrossbarArray {
  int rows = 0;
  int cols = 0;
  std::vector<OneT1R> cells;  // row-major

  OneT1R& at(int r, int c) {
    return cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
  const OneT1R& at(int r, int c) const {
    return cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
};

inline CrossbarArray make_crossbar_array(int rows, int cols, const DeviceParams& p, Rng& rng) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("make_crossbar_array: grid must be positive");
  CrossbarArray arr;
  arr.rows = rows;
  arr.cols = cols;
  arr.cells.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      OneT1R t;
      t.cell = make_cell(p, rng);
      t.switch_on_resistance_ohm = p.switch_on_resistance_ohm;
      arr.cells.push_back(t);
    }
  }
  return arr;
}

struct CellProgramRecord {
  int row = 0;
  int col = 0;
  int pulses = 0;
  double final_conductance_s = 0.0;
};

struct ProgramReport {
  std::vector<CellProgramRecord> records;  // coupled cells, row-major order
};

// Form every coupled cell at the top of the forming window, then push it
// into the set-verify loop until it clears the target fraction of g_max.
// A cell that exhausts the pulse budget is a bad device.
inline ProgramReport program_layout(CrossbarArray& arr, const CrossbarLayout& lay, const DeviceParams& p) {
  if (arr.rows != lay.rows || arr.cols != lay.cols)
    throw std::invalid_argument("program_layout: array and layout disagree on grid size");
  ProgramReport report;
  const double target = p.program_verify_fraction * p.g_max_s;
  const PulseSpec set_pulse{p.set_pulse_amplitude_v, p.pulse_width_s};
  for (const auto& pt : lay.points) {
    if (pt.role != CrosspointRole::coupled) continue;
    OneT1R& t = arr.at(pt.row, pt.col);
    t.cell = form(t.cell, p.forming_clamp_hi_v, p);
    if (!t.cell.formed)
      throw ProgrammingError("cell " + cell_id(pt.row, pt.col) + " failed to form");
    int pulses = 0;
    while (t.cell.conductance_base_s < target) {
      if (pulses >= p.program_pulse_budget)
        throw ProgrammingError("cell " + cell_id(pt.row, pt.col) + " missed program-verify in " +
                               std::to_string(p.program_pulse_budget) + " pulses");
      t.cell = apply_pulse(t.cell, set_pulse, p);
      ++pulses;
    }
    report.records.push_back({pt.row, pt.col, pulses, t.cell.conductance_base_s});
  }
  return report;
}

}  // namespace onnsim
