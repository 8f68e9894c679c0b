#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "onnsim/coupling.hpp"
#include "onnsim/engine.hpp"

namespace onnsim {

// Shortest round-trippable decimal; keeps reruns byte-identical because it
// never depends on locale or stream state.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_waveforms_csv(std::ostream& os, const WaveformSet& w) {
  os << "time";
  for (std::size_t k = 0; k < w.channels.size(); ++k) os << ",osc" << k;
  os << "\n";
  for (std::size_t i = 0; i < w.times.size(); ++i) {
    os << csv_num(w.times[i]);
    for (const auto& ch : w.channels) os << ',' << csv_num(ch[i]);
    os << "\n";
  }
}

inline void write_layout_csv(std::ostream& os, const CrossbarLayout& lay) {
  os << "row,col,role,neuron_i,neuron_j,wiring\n";
  for (const auto& pt : lay.points) {
    os << pt.row << ',' << pt.col << ',' << to_string(pt.role) << ',' << pt.neuron_row << ','
       << pt.neuron_col << ',' << to_string(pt.wiring) << "\n";
  }
}

inline void write_disturb_csv(std::ostream& os, const std::vector<DisturbEvent>& events) {
  os << "time,cell_id,voltage\n";
  for (const auto& ev : events)
    os << csv_num(ev.time_s) << ',' << ev.cell_id << ',' << csv_num(ev.voltage_across_v) << "\n";
}

inline void write_programming_csv(std::ostream& os, const ProgramReport& rep) {
  os << "cell_id,pulses,final_conductance\n";
  for (const auto& r : rep.records)
    os << cell_id(r.row, r.col) << ',' << r.pulses << ',' << csv_num(r.final_conductance_s) << "\n";
}

inline void write_cells_csv(std::ostream& os, const CrossbarArray& arr) {
  os << "cell_id,formed,conductance_base,disturb_count\n";
  for (int r = 0; r < arr.rows; ++r) {
    for (int c = 0; c < arr.cols; ++c) {
      const auto& cell = arr.at(r, c).cell;
      os << cell_id(r, c) << ',' << (cell.formed ? 1 : 0) << ',' << csv_num(cell.conductance_base_s)
         << ',' << cell.disturb_count << "\n";
    }
  }
}

}  // namespace onnsim
