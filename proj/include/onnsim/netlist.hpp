#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "onnsim/coupling.hpp"
#include "onnsim/device.hpp"
#include "onnsim/errors.hpp"
#include "onnsim/oscillator.hpp"

namespace onnsim {

struct CouplingParams {
  double series_resistance_ohm = 47e3;  // one resistor on each wire of a branch
  double gate_on_voltage_v = 4.5;
};

// Resistive path between two ring taps: series resistor, 1T1R, series
// resistor. The cell itself stays in the array; the branch only remembers
// where to find it.
struct Branch {
  int row = 0;
  int col = 0;
  CrosspointRole role = CrosspointRole::redundant;
  std::size_t state_a = 0;  // global state index of the row-side tap node
  std::size_t state_b = 0;  // and of the column-side tap node
  double wire_resistance_ohm = 0.0;  // both series resistors, switch excluded
  std::string id;
};

struct Netlist {
  int n_neurons = 0;
  std::vector<Branch> branches;
};

inline std::size_t state_index(int neuron, int stage_1based, const RingParams& ring) {
  return static_cast<std::size_t>(neuron) * static_cast<std::size_t>(ring.n_stages) +
         static_cast<std::size_t>(stage_1based - 1);
}

// Every crosspoint whose two wires both belong to oscillators becomes a
// branch; positions on spare wires never touch the circuit.
inline Netlist assemble_netlist(const CrossbarLayout& lay, const RingParams& ring,
                                const CouplingParams& coupling) {
  validate(ring);
  Netlist net;
  net.n_neurons = lay.n_neurons;
  for (const auto& pt : lay.points) {
    if (pt.role == CrosspointRole::unused) continue;
    Branch b;
    b.row = pt.row;
    b.col = pt.col;
    b.role = pt.role;
    b.state_a = state_index(pt.neuron_row, pt.row_tap_stage, ring);
    b.state_b = state_index(pt.neuron_col, pt.col_tap_stage, ring);
    b.wire_resistance_ohm = 2.0 * coupling.series_resistance_ohm;
    b.id = cell_id(pt.row, pt.col);
    net.branches.push_back(std::move(b));
  }
  return net;
}

struct BranchSolution {
  double current_a = 0.0;  // positive from the row-side node into the column-side node
  double v_device = 0.0;   // drop across the resistive cell alone
  int iterations = 0;
};

// The cell conductance depends on its own voltage drop, so the divider is
// an implicit equation: v_dev = v_ab / (1 + R_series * G(v_dev)). The
// nonlinearity is weak (the series resistors dominate), making plain
// fixed-point iteration a strong contraction.
inline BranchSolution solve_branch(double v_ab, const ReRamCell& cell, double series_ohm) {
  constexpr int kMaxIter = 8;
  constexpr double kTolV = 1e-6;
  double v_dev = v_ab / (1.0 + series_ohm * conductance_at(cell, 0.0));
  for (int it = 1; it <= kMaxIter; ++it) {
    const double next = v_ab / (1.0 + series_ohm * conductance_at(cell, v_dev));
    const double resid = std::abs(next - v_dev);
    v_dev = next;
    if (resid < kTolV)
      return {v_dev * conductance_at(cell, v_dev), v_dev, it};
  }
  throw SolverError("branch solve did not converge at v_ab = " + std::to_string(v_ab));
}

}  // namespace onnsim
