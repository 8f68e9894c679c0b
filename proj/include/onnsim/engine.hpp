#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onnsim/coupling.hpp"
#include "onnsim/device.hpp"
#include "onnsim/errors.hpp"
#include "onnsim/netlist.hpp"
#include "onnsim/oscillator.hpp"
#include "onnsim/rk4.hpp"

namespace onnsim {

enum class GateScope { all_cells, coupled_cells, subset };

struct GateEvent {
  double time_s = 0.0;
  bool on = true;
  GateScope scope = GateScope::all_cells;
  std::vector<std::pair<int, int>> subset;  // (row, col), only for GateScope::subset
};

struct SimParams {
  double dt_s = 2.5e-7;
  double duration_s = 0.0;
  std::size_t max_samples = 1'000'000;  // recorded samples per channel; longer runs decimate
};

struct WaveformSet {
  std::vector<double> times;
  std::vector<std::vector<double>> channels;  // output-stage voltage per oscillator
  std::vector<DisturbEvent> disturb_events;
  double max_formed_device_voltage_v = 0.0;
  std::vector<double> final_state;
  long long n_steps = 0;
  double dt_s = 0.0;
};

namespace detail {

inline void apply_gate_event(const GateEvent& ev, const CrossbarLayout& lay, CrossbarArray& arr) {
  switch (ev.scope) {
    case GateScope::all_cells:
      for (auto& t : arr.cells) t.gate_on = ev.on;
      break;
    case GateScope::coupled_cells:
      for (const auto& pt : lay.points)
        if (pt.role == CrosspointRole::coupled) arr.at(pt.row, pt.col).gate_on = ev.on;
      break;
    case GateScope::subset:
      for (auto [r, c] : ev.subset) {
        if (r < 0 || r >= arr.rows || c < 0 || c >= arr.cols)
          throw std::invalid_argument("gate event subset position outside the array");
        arr.at(r, c).gate_on = ev.on;
      }
      break;
  }
}

}  // namespace detail

// Fixed-step RK4 transient over the coupled rings. Gate events snap to the
// nearest step boundary and toggle access transistors in the array, which
// stays the single source of truth for gate state; the engine also bumps
// the cells' disturb counters, so the array comes back mutated.
inline WaveformSet simulate(const RingParams& ring, const DeviceParams& dev,
                            const CrossbarLayout& lay, CrossbarArray& arr,
                            const CouplingParams& coupling, std::vector<GateEvent> events,
                            std::span<const double> y0, const SimParams& sim) {
  validate(ring);
  if (!(sim.dt_s > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  if (!(sim.duration_s > 0.0)) throw std::invalid_argument("simulate: duration must be positive");
  if (sim.max_samples < 2) throw std::invalid_argument("simulate: need at least two samples");

  const Netlist net = assemble_netlist(lay, ring, coupling);
  const int n_neurons = net.n_neurons;
  const auto stages = static_cast<std::size_t>(ring.n_stages);
  const auto n_state = static_cast<std::size_t>(n_neurons) * stages;
  if (y0.size() != n_state) throw std::invalid_argument("simulate: initial state has the wrong size");

  const auto n_steps = static_cast<long long>(std::llround(sim.duration_s / sim.dt_s));
  if (n_steps < 1) throw std::invalid_argument("simulate: duration shorter than one step");

  struct Timed {
    long long step;
    std::size_t order;
    GateEvent ev;
  };
  std::vector<Timed> timeline;
  timeline.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    long long s = std::llround(events[i].time_s / sim.dt_s);
    s = std::clamp(s, 0LL, n_steps);
    timeline.push_back({s, i, std::move(events[i])});
  }
  std::sort(timeline.begin(), timeline.end(), [](const Timed& a, const Timed& b) {
    return a.step != b.step ? a.step < b.step : a.order < b.order;
  });

  struct Active {
    const Branch* branch;
    OneT1R* t1r;
    double series_ohm;
  };
  std::vector<Active> active;
  auto rebuild_active = [&] {
    active.clear();
    for (const auto& b : net.branches) {
      OneT1R& t = arr.at(b.row, b.col);
      if (t.gate_on) active.push_back({&b, &t, b.wire_resistance_ohm + t.switch_on_resistance_ohm});
    }
  };
  rebuild_active();

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> inject(n_state, 0.0);
  Rk4Stepper stepper(n_state);

  auto deriv = [&](double, std::span<const double> yy, std::span<double> dydt) {
    if (active.empty()) {
      for (int k = 0; k < n_neurons; ++k) {
        const auto off = static_cast<std::size_t>(k) * stages;
        ring_derivative(ring, yy.subspan(off, stages), {}, dydt.subspan(off, stages));
      }
      return;
    }
    std::fill(inject.begin(), inject.end(), 0.0);
    for (const auto& a : active) {
      const double v_ab = yy[a.branch->state_a] - yy[a.branch->state_b];
      const BranchSolution sol = solve_branch(v_ab, a.t1r->cell, a.series_ohm);
      inject[a.branch->state_a] -= sol.current_a;
      inject[a.branch->state_b] += sol.current_a;
    }
    for (int k = 0; k < n_neurons; ++k) {
      const auto off = static_cast<std::size_t>(k) * stages;
      ring_derivative(ring, yy.subspan(off, stages), std::span<const double>(inject).subspan(off, stages),
                      dydt.subspan(off, stages));
    }
  };

  const auto stride =
      static_cast<long long>((static_cast<std::size_t>(n_steps) + sim.max_samples) / sim.max_samples);

  WaveformSet out;
  out.dt_s = sim.dt_s;
  out.n_steps = n_steps;
  out.channels.assign(static_cast<std::size_t>(n_neurons), {});
  auto record = [&](long long step) {
    out.times.push_back(static_cast<double>(step) * sim.dt_s);
    for (int k = 0; k < n_neurons; ++k)
      out.channels[static_cast<std::size_t>(k)].push_back(
          y[state_index(k, ring.output_stage, ring)]);
  };

  std::size_t next_event = 0;
  for (long long step = 0; step <= n_steps; ++step) {
    bool gates_changed = false;
    while (next_event < timeline.size() && timeline[next_event].step == step) {
      detail::apply_gate_event(timeline[next_event].ev, lay, arr);
      gates_changed = true;
      ++next_event;
    }
    if (gates_changed) rebuild_active();

    if (step % stride == 0 || step == n_steps) record(step);
    if (step == n_steps) break;

    const double t = static_cast<double>(step) * sim.dt_s;
    stepper.step(deriv, t, sim.dt_s, y);

    for (double v : y)
      if (!std::isfinite(v)) throw SolverError("simulate: state became non-finite");

    const double t_now = static_cast<double>(step + 1) * sim.dt_s;
    for (const auto& a : active) {
      const double v_ab = y[a.branch->state_a] - y[a.branch->state_b];
      const BranchSolution sol = solve_branch(v_ab, a.t1r->cell, a.series_ohm);
      if (a.t1r->cell.formed)
        out.max_formed_device_voltage_v =
            std::max(out.max_formed_device_voltage_v, std::abs(sol.v_device));
      if (auto ev = check_disturb(a.t1r->cell, sol.v_device, t_now, a.branch->id, dev))
        out.disturb_events.push_back(std::move(*ev));
    }
  }

  out.final_state = std::move(y);
  return out;
}

// The same engine with no array at all: a bank of isolated rings.
inline WaveformSet simulate_isolated(const RingParams& ring, const DeviceParams& dev, int n_neurons,
                                     std::span<const double> y0, const SimParams& sim) {
  CrossbarLayout lay;
  lay.rows = 0;
  lay.cols = 0;
  lay.n_neurons = n_neurons;
  CrossbarArray arr;
  arr.rows = 0;
  arr.cols = 0;
  CouplingParams coupling;
  return simulate(ring, dev, lay, arr, coupling, {}, y0, sim);
}

// Stack per-oscillator limit-cycle states into one engine state vector.
inline std::vector<double> initial_state_from_phases(const RingParams& ring,
                                                     const std::vector<double>& phases_deg) {
  const LimitCycle& lc = LimitCycle::get(ring);
  std::vector<double> y;
  y.reserve(phases_deg.size() * static_cast<std::size_t>(ring.n_stages));
  for (double ph : phases_deg) {
    const auto s = lc.state_at_phase(ph);
    y.insert(y.end(), s.begin(), s.end());
  }
  return y;
}

}  // namespace onnsim
