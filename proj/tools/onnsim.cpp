#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "onnsim/onnsim.hpp"

namespace {

onnsim::ExperimentConfig resolve_config(const std::string& path) {
  if (!path.empty()) return onnsim::load_config(path);
  return {};
}

void maybe_bundle(bool bundle, const onnsim::ExperimentConfig& c, const std::string& out_dir) {
  if (!bundle) return;
  std::filesystem::create_directories(out_dir);
  onnsim::save_config((std::filesystem::path(out_dir) / "config.json").string(), c);
}

int do_retrieve(const onnsim::ExperimentConfig& c, const std::string& pattern,
                const std::string& out_dir) {
  const onnsim::RetrievalResult res = onnsim::run_retrieval(c, pattern);
  onnsim::write_retrieval_outputs(res, c, out_dir);
  std::printf("pattern %s on %zu oscillators\n", res.pattern_name.c_str(), res.readings.size());
  for (const auto& r : res.readings)
    std::printf("  osc%d  %9.2f Hz  %7.2f deg  %s\n", r.oscillator_id, r.frequency_hz,
                r.relative_phase_deg, onnsim::to_string(r.pixel));
  if (res.lock_onset_s)
    std::printf("locked at %.6g s (deadline %.6g s)\n", *res.lock_onset_s, res.lock_deadline_s);
  else
    std::printf("no lock detected\n");
  std::printf("max formed-cell voltage %.4g V, %zu disturb events\n",
              res.waves.max_formed_device_voltage_v, res.waves.disturb_events.size());
  std::printf("pattern %s\n", res.matched ? "matched" : "NOT matched");
  return res.matched ? onnsim::kExitOk : onnsim::kExitRetrievalMismatch;
}

int do_toggle(const onnsim::ExperimentConfig& c, const std::string& out_dir) {
  const onnsim::ToggleResult res = onnsim::run_coupling_toggle(c);
  onnsim::write_toggle_outputs(res, c, out_dir);
  std::printf("intrinsic %9.2f Hz, gates dropped at %.6g s\n", res.intrinsic_hz, res.gate_off_time_s);
  for (std::size_t k = 0; k < res.free_hz.size(); ++k)
    std::printf("  osc%zu  coupled %9.2f Hz  free %9.2f Hz\n", k, res.coupled_hz[k], res.free_hz[k]);
  std::printf("intrinsic frequency %s\n", res.recovered ? "recovered" : "NOT recovered");
  return res.recovered ? onnsim::kExitOk : onnsim::kExitRetrievalMismatch;
}

int do_characterize(const onnsim::ExperimentConfig& c, const std::string& out_dir) {
  const onnsim::CharacterizationResult res = onnsim::run_device_characterization(c);
  onnsim::write_characterization_outputs(res, c, out_dir);
  std::printf("forming over %zu draws: mean %.4f V, sd %.4f V\n", res.forming_draws_v.size(),
              res.forming_mean_v, res.forming_sd_v);
  std::printf("set sweep reaches %.6g S, reset sweep reaches %.6g S\n", res.set_sweep_g.back(),
              res.reset_sweep_g.back());
  std::printf("projected conductance at %.6g s: %.6g S\n", res.retention.back().first,
              res.retention.back().second);
  return onnsim::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient simulator for ReRAM-coupled ring-oscillator networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string pattern = "horizontal";
  bool bundle = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")
        ->envname("ONNSIM_CONFIG")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--bundle", bundle, "copy the resolved config into the output directory");
  };

  auto* retrieve = app.add_subcommand("retrieve", "program a pattern set and retrieve one pattern");
  retrieve->add_option("--pattern", pattern, "pattern to retrieve (a configured name, or custom)");
  add_common(retrieve);
  auto* toggle = app.add_subcommand("toggle", "drop the coupling mid-run and watch the rings free-run");
  add_common(toggle);
  auto* characterize = app.add_subcommand("characterize", "device-level sweeps and statistics");
  add_common(characterize);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? onnsim::kExitOk : onnsim::kExitConfigError;
  }

  try {
    const onnsim::ExperimentConfig c = resolve_config(config_path);
    onnsim::validate(c);
    maybe_bundle(bundle, c, out_dir);
    if (retrieve->parsed()) return do_retrieve(c, pattern, out_dir);
    if (toggle->parsed()) return do_toggle(c, out_dir);
    return do_characterize(c, out_dir);
  } catch (const onnsim::ProgrammingError& e) {
    std::fprintf(stderr, "programming error: %s\n", e.what());
    return onnsim::kExitProgramming;
  } catch (const onnsim::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return onnsim::kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return onnsim::kExitConfigError;
  }
}
