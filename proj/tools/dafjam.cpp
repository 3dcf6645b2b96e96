// dafjam: offline jamming, simulation, physics queries, sweeps, and the live
// control service.
//
// Exit codes: 0 ok, 2 usage, 3 io, 4 domain.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dafjam/control/server.hpp"
#include "dafjam/control/session.hpp"
#include "dafjam/dafjam.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDomain = 4;

struct ModulationFlags {
  std::string mode = "fixed";
  double amplitude_s = 0.05;
  double frequency_hz = 1.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "Delay schedule")
        ->check(CLI::IsMember({"fixed", "sinusoid", "triangle", "square"}))
        ->capture_default_str();
    cmd->add_option("--amplitude-s", amplitude_s, "Modulation depth (periodic modes)")
        ->capture_default_str();
    cmd->add_option("--frequency-hz", frequency_hz, "Modulation rate (periodic modes)")
        ->capture_default_str();
  }

  dafjam::ModulationSpec spec(double base_s) const {
    const auto kind = *dafjam::parse_modulation_kind(mode);
    if (kind == dafjam::ModulationKind::Fixed) return dafjam::ModulationSpec::fixed(base_s);
    return {kind, base_s, amplitude_s, frequency_hz};
  }
};

dafjam::PathModel path_from_flag(const std::string& s) { return *dafjam::parse_path(s); }

const auto kPathCheck = CLI::IsMember({"round-trip", "one-way", "round_trip", "one_way"});

void configure_logging() {
  const char* env = std::getenv("DAFJAM_LOG");
  // Diagnostics go to stderr; stdout carries JSON only.
  spdlog::set_default_logger(spdlog::stderr_color_mt("dafjam"));
  spdlog::set_pattern("[%l] %v");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

void print_json(const dafjam::json& j) { std::cout << j.dump(2) << '\n'; }

dafjam::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dafjam::Error(dafjam::ErrorKind::FileNotFound, path);
  dafjam::json j = dafjam::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw dafjam::Error(dafjam::ErrorKind::IoError, path + " is not valid JSON");
  return j;
}

// ---- jam ----------------------------------------------------------------------

struct JamFlags {
  std::string in, out;
  double delay_s = 0.1;
  double input_gain_db = 0.0, output_gain_db = 0.0;
  double max_delay_s = 2.0;
  std::size_t block_size = 480;
  bool tail = false;
  ModulationFlags mod;
};

int run_jam(const JamFlags& f) {
  const auto input = dafjam::read_wav(f.in);
  spdlog::info("read {} samples at {} Hz from {}", input.size(), input.sample_rate_hz, f.in);

  dafjam::Engine engine(input.sample_rate_hz, f.max_delay_s);
  dafjam::JamParams params;
  params.modulation = f.mod.spec(f.delay_s);
  params.gains = dafjam::GainStage{f.input_gain_db, f.output_gain_db, false};
  engine.set_params(params);

  std::vector<double> samples = input.samples;
  if (f.tail) {
    samples.resize(samples.size() +
                   static_cast<std::size_t>(std::ceil(params.modulation.max_delay_s() * input.sample_rate_hz)) + 1);
  }
  dafjam::AudioBuffer out(input.sample_rate_hz, samples.size());
  for (std::size_t start = 0; start < samples.size(); start += f.block_size) {
    const std::size_t n = std::min(f.block_size, samples.size() - start);
    engine.process(std::span<const double>(samples).subspan(start, n),
                   std::span<double>(out.samples).subspan(start, n));
  }
  dafjam::write_wav(f.out, out);
  spdlog::info("wrote {} samples to {}", out.size(), f.out);
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------------

struct SimulateFlags {
  double d_daf_s = 0.2;
  double distance_m = 0.0;
  double temperature_c = 20.0;
  std::string path = "round-trip";
  double natural_gain_db = 0.0, feedback_gain_db = 0.0;
  int sample_rate = 48000;
  double duration_s = 0.5;
  std::uint32_t seed = 1;
  std::string in, mix_out;
  ModulationFlags mod;
};

int run_simulate(const SimulateFlags& f) {
  const dafjam::Environment env{f.temperature_c, f.distance_m};
  auto cfg = dafjam::config_for_target(f.d_daf_s, env, path_from_flag(f.path), f.sample_rate);
  cfg.params.modulation = f.mod.spec(cfg.params.modulation.base_s);
  cfg.natural_feedback_gain_db = f.natural_gain_db;
  cfg.feedback_gain_db = f.feedback_gain_db;

  dafjam::AudioBuffer dry = f.in.empty()
                                ? dafjam::fixtures::white_noise(f.sample_rate, f.duration_s, f.seed)
                                : dafjam::read_wav(f.in);
  cfg.sample_rate_hz = dry.sample_rate_hz;

  const auto result = dafjam::simulate_session(dry, cfg);
  if (!f.mix_out.empty()) dafjam::write_wav(f.mix_out, result.mix);
  print_json(dafjam::to_json(result.report));
  return kExitOk;
}

// ---- physics --------------------------------------------------------------------

struct PhysicsFlags {
  double d_daf_s = 0.2;
  double temperature_c = 20.0;
  double distance_m = 0.0;
  std::string path = "round-trip";
};

int run_physics(const PhysicsFlags& f) {
  print_json(dafjam::control::physics_summary(f.d_daf_s, f.temperature_c, f.distance_m,
                                              path_from_flag(f.path)));
  return kExitOk;
}

// ---- sweep ----------------------------------------------------------------------

struct SweepFlags {
  std::string grid, out;
  int sample_rate = 48000;
};

int run_sweep_cmd(const SweepFlags& f) {
  const auto grid = f.grid.empty() ? dafjam::SweepGrid::defaults()
                                   : dafjam::grid_from_json(read_json_file(f.grid));
  const auto rows = dafjam::run_sweep(grid, f.sample_rate);
  std::ofstream out(f.out, std::ios::trunc);
  if (!out) throw dafjam::Error(dafjam::ErrorKind::IoError, "cannot open " + f.out + " for writing");
  dafjam::write_sweep_csv(out, rows);
  if (!out) throw dafjam::Error(dafjam::ErrorKind::IoError, "write failed for " + f.out);

  std::size_t pass = 0, fail = 0, errors = 0;
  for (const auto& r : rows) {
    if (r.status == "pass") ++pass;
    else if (r.status == "fail") ++fail;
    else ++errors;
  }
  std::cerr << rows.size() << " rows: " << pass << " pass, " << fail << " fail, " << errors
            << " infeasible\n";
  return kExitOk;
}

// ---- serve ----------------------------------------------------------------------

struct ServeFlags {
  unsigned short port = 8080;
  std::string address = "127.0.0.1";
  std::string config;
};

int run_serve(const ServeFlags& f) {
  dafjam::control::SessionConfig cfg;
  if (!f.config.empty()) cfg = dafjam::control::session_config_from_json(read_json_file(f.config));

  // Block termination signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  dafjam::control::Session session(cfg);
  dafjam::control::ControlServer server(session, f.address, f.port);
  session.start();
  server.start();
  spdlog::info("control service on http://{}:{}", f.address, server.port());
  std::cerr << "listening on " << f.address << ':' << server.port() << '\n';

  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  session.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Delayed-auditory-feedback speech jammer"};
  app.require_subcommand(1);

  JamFlags jam;
  auto* jam_cmd = app.add_subcommand("jam", "Apply the delay engine to a WAV file");
  jam_cmd->add_option("--in", jam.in, "Input WAV (PCM16 mono)")->required();
  jam_cmd->add_option("--out", jam.out, "Output WAV")->required();
  jam_cmd->add_option("--delay-s", jam.delay_s, "Delay (base of the schedule)")->capture_default_str();
  jam_cmd->add_option("--input-gain-db", jam.input_gain_db)->capture_default_str();
  jam_cmd->add_option("--output-gain-db", jam.output_gain_db)->capture_default_str();
  jam_cmd->add_option("--max-delay-s", jam.max_delay_s, "Delay line capacity")->capture_default_str();
  jam_cmd->add_option("--block-size", jam.block_size)->check(CLI::PositiveNumber)->capture_default_str();
  jam_cmd->add_flag("--tail", jam.tail, "Extend the output so the delayed signal ends in full");
  jam.mod.add_to(jam_cmd);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the acoustic feedback loop");
  sim_cmd->add_option("--d-daf-s", sim.d_daf_s, "Target total feedback delay")->capture_default_str();
  sim_cmd->add_option("--distance-m", sim.distance_m)->capture_default_str();
  sim_cmd->add_option("--temperature-c", sim.temperature_c)->capture_default_str();
  sim_cmd->add_option("--path", sim.path)->check(kPathCheck)->capture_default_str();
  sim_cmd->add_option("--natural-gain-db", sim.natural_gain_db)->capture_default_str();
  sim_cmd->add_option("--feedback-gain-db", sim.feedback_gain_db)->capture_default_str();
  sim_cmd->add_option("--sample-rate", sim.sample_rate)->capture_default_str();
  sim_cmd->add_option("--duration-s", sim.duration_s, "White-noise fixture length")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--in", sim.in, "Dry WAV instead of white noise");
  sim_cmd->add_option("--mix-out", sim.mix_out, "Write the simulated mix");
  sim.mod.add_to(sim_cmd);

  PhysicsFlags phys;
  auto* phys_cmd = app.add_subcommand("physics", "Delay arithmetic for one geometry");
  phys_cmd->add_option("--d-daf-s", phys.d_daf_s)->capture_default_str();
  phys_cmd->add_option("--temperature-c", phys.temperature_c)->capture_default_str();
  phys_cmd->add_option("--distance-m", phys.distance_m)->capture_default_str();
  phys_cmd->add_option("--path", phys.path)->check(kPathCheck)->capture_default_str();

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Simulate a parameter grid and write CSV");
  sweep_cmd->add_option("--grid", sweep.grid, "Grid JSON (defaults built in)");
  sweep_cmd->add_option("--out", sweep.out, "Output CSV")->required();
  sweep_cmd->add_option("--sample-rate", sweep.sample_rate)->capture_default_str();

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/WebSocket control service");
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--address", serve.address)->capture_default_str();
  serve_cmd->add_option("--config", serve.config, "Session JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*jam_cmd) return run_jam(jam);
    if (*sim_cmd) return run_simulate(sim);
    if (*phys_cmd) return run_physics(phys);
    if (*sweep_cmd) return run_sweep_cmd(sweep);
    if (*serve_cmd) return run_serve(serve);
  } catch (const dafjam::ValidationError& e) {
    std::cerr << "error: " << e.field() << ": " << e.reason() << '\n';
    return kExitDomain;
  } catch (const dafjam::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dafjam::is_io_error(e.kind()) ? kExitIo : kExitDomain;
  } catch (const boost::system::system_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
