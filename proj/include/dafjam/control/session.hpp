#pragma once

// Live jammer session: owns the device state, the delay engine, the audio
// thread that drives it, and the telemetry thread.
//
// Writers (API handlers) are serialized by a mutex, validate the whole patched
// state, then publish an immutable snapshot and hand the resolved JamParams to
// the engine's lock-free mailbox. The audio thread adopts the newest
// parameters at block boundaries and never locks.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dafjam/control/telemetry.hpp"
#include "dafjam/delay_engine.hpp"
#include "dafjam/device_model.hpp"
#include "dafjam/error.hpp"
#include "dafjam/json_io.hpp"
#include "dafjam/wav.hpp"

namespace dafjam::control {

/// Where the session's audio comes from and goes to.
class AudioBackend {
 public:
  virtual ~AudioBackend() = default;
  virtual int sample_rate_hz() const = 0;
  /// Fills block with input; a short count marks the end of the stream.
  virtual std::size_t read(std::span<double> block) = 0;
  virtual void write(std::span<const double> block) = 0;
  virtual void finish() {}
};

/// WAV file input, optionally looped. When not looping, the processed output
/// is captured into a buffer sized up front.
class FileBackend final : public AudioBackend {
 public:
  FileBackend(AudioBuffer input, bool loop) : input_(std::move(input)), loop_(loop) {
    if (!loop_) captured_.samples.reserve(input_.size());
    captured_.sample_rate_hz = input_.sample_rate_hz;
  }

  int sample_rate_hz() const override { return input_.sample_rate_hz; }

  std::size_t read(std::span<double> block) override {
    std::size_t n = 0;
    while (n < block.size() && !input_.empty()) {
      if (pos_ == input_.size()) {
        if (!loop_) break;
        pos_ = 0;
      }
      block[n++] = input_.samples[pos_++];
    }
    return n;
  }

  void write(std::span<const double> block) override {
    if (loop_) return;
    const std::size_t room = captured_.samples.capacity() - captured_.samples.size();
    const std::size_t n = std::min(room, block.size());
    captured_.samples.insert(captured_.samples.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(n));
  }

  const AudioBuffer& captured() const { return captured_; }

 private:
  AudioBuffer input_;
  bool loop_;
  std::size_t pos_ = 0;
  AudioBuffer captured_;
};

/// Stand-in for a duplex sound card: silent input, discarded output.
class LiveStubBackend final : public AudioBackend {
 public:
  explicit LiveStubBackend(int sample_rate_hz) : rate_(sample_rate_hz) {}
  int sample_rate_hz() const override { return rate_; }
  std::size_t read(std::span<double> block) override {
    std::fill(block.begin(), block.end(), 0.0);
    return block.size();
  }
  void write(std::span<const double>) override {}

 private:
  int rate_;
};

enum class SourceKind { File, LiveStub };

struct SourceConfig {
  SourceKind kind = SourceKind::LiveStub;
  std::string path;
  bool loop = true;
};

struct SessionConfig {
  int sample_rate_hz = 48000;
  double max_delay_s = Engine::kMaxCapacityS;
  std::size_t block_size = 480;
  SourceConfig source{};
  // Playback pacing relative to real time; 0 runs as fast as possible.
  double speed = 1.0;
  double telemetry_hz = 10.0;
  std::size_t subscriber_queue = 64;
  // File source without looping: write the processed stream here at the end.
  std::optional<std::string> output_path;
  DeviceState device{};
};

inline SessionConfig session_config_from_json(const json& j) {
  SessionConfig cfg;
  if (!j.is_object()) throw ValidationError("config", "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "sample_rate_hz") {
      if (!value.is_number_integer()) throw ValidationError(key, "must be an integer");
      cfg.sample_rate_hz = value.get<int>();
    } else if (key == "max_delay_s") {
      cfg.max_delay_s = detail::number_field(value, key, "");
    } else if (key == "block_size") {
      if (!value.is_number_unsigned() || value.get<std::size_t>() == 0) {
        throw ValidationError(key, "must be a positive integer");
      }
      cfg.block_size = value.get<std::size_t>();
    } else if (key == "speed") {
      cfg.speed = detail::number_field(value, key, "");
      if (cfg.speed < 0.0) throw ValidationError(key, "must be >= 0");
    } else if (key == "telemetry_hz") {
      cfg.telemetry_hz = detail::number_field(value, key, "");
      if (!(cfg.telemetry_hz > 0.0)) throw ValidationError(key, "must be > 0");
    } else if (key == "subscriber_queue") {
      if (!value.is_number_unsigned() || value.get<std::size_t>() == 0) {
        throw ValidationError(key, "must be a positive integer");
      }
      cfg.subscriber_queue = value.get<std::size_t>();
    } else if (key == "output_path") {
      if (!value.is_string()) throw ValidationError(key, "must be a string");
      cfg.output_path = value.get<std::string>();
    } else if (key == "source") {
      if (!value.is_object() || !value.contains("kind") || !value["kind"].is_string()) {
        throw ValidationError("source.kind", "must be \"file\" or \"live_stub\"");
      }
      const auto kind = value["kind"].get<std::string>();
      if (kind == "live_stub") {
        cfg.source = SourceConfig{SourceKind::LiveStub, "", true};
      } else if (kind == "file") {
        if (!value.contains("path") || !value["path"].is_string()) {
          throw ValidationError("source.path", "must be a string");
        }
        cfg.source = SourceConfig{SourceKind::File, value["path"].get<std::string>(),
                                  value.value("loop", true)};
      } else {
        throw ValidationError("source.kind", "must be \"file\" or \"live_stub\"");
      }
    } else if (key == "device") {
      cfg.device = device_state_from_json(value);
    } else {
      throw ValidationError(key, "unknown field");
    }
  }
  return cfg;
}

/// Who decides the delay schedule: the device model (rotary / mode), or a
/// modulation spec set directly through the API.
enum class ControlSource { Device, Direct };

inline std::string_view to_string(ControlSource c) { return c == ControlSource::Device ? "device" : "direct"; }

/// Immutable published state. Every field belongs to the same update.
struct SessionSnapshot {
  std::uint64_t version = 0;
  DeviceState device{};
  ControlSource control = ControlSource::Device;
  ModulationSpec direct_modulation = ModulationSpec::sinusoid(0.15, 0.05, 1.0);
  double epoch_s = 0.0;
  JamParams params{};
  bool clamped = false;
  std::optional<ErrorKind> physics_error;
};

inline json to_json(const SessionSnapshot& s) {
  json j = {{"version", s.version},
            {"device", to_json(s.device)},
            {"control", std::string(to_string(s.control))},
            {"direct_modulation", to_json(s.direct_modulation)},
            {"epoch_s", s.epoch_s},
            {"params", to_json(s.params)},
            {"delay_s", s.params.modulation.base_s},
            {"muted", s.params.gains.muted},
            {"clamped", s.clamped}};
  j["physics_error"] = s.physics_error ? json(std::string(to_string(*s.physics_error))) : json(nullptr);
  return j;
}

class Session {
 public:
  explicit Session(SessionConfig cfg)
      : cfg_(std::move(cfg)),
        engine_(cfg_.sample_rate_hz, cfg_.max_delay_s),
        adoption_log_(1 << 16),
        hub_(cfg_.subscriber_queue) {
    if (cfg_.block_size == 0) throw Error(ErrorKind::InvalidConfig, "block size must be > 0");
    if (cfg_.source.kind == SourceKind::File) {
      AudioBuffer in = read_wav(cfg_.source.path);
      if (in.sample_rate_hz != cfg_.sample_rate_hz) {
        throw Error(ErrorKind::SampleRateMismatch,
                    cfg_.source.path + " is " + std::to_string(in.sample_rate_hz) +
                        " Hz, session runs at " + std::to_string(cfg_.sample_rate_hz) + " Hz");
      }
      backend_ = std::make_unique<FileBackend>(std::move(in), cfg_.source.loop);
    } else {
      backend_ = std::make_unique<LiveStubBackend>(cfg_.sample_rate_hz);
    }
    engine_.attach_adoption_log(&adoption_log_);

    SessionSnapshot initial;
    initial.device = cfg_.device;
    publish(resolve(std::move(initial)));
  }

  /// File source from an in-memory buffer (no looping, output captured).
  Session(SessionConfig cfg, AudioBuffer input) : Session(with_stub_source(std::move(cfg))) {
    if (input.sample_rate_hz != cfg_.sample_rate_hz) {
      throw Error(ErrorKind::SampleRateMismatch, "input rate differs from session rate");
    }
    cfg_.source = SourceConfig{SourceKind::File, "<memory>", false};
    backend_ = std::make_unique<FileBackend>(std::move(input), false);
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() { stop(); }

  const SessionConfig& config() const { return cfg_; }

  void start() {
    if (started_.exchange(true)) return;
    running_ = true;
    start_time_ = std::chrono::steady_clock::now();
    audio_thread_ = std::thread([this] { audio_loop(); });
    telemetry_thread_ = std::thread([this] { telemetry_loop(); });
  }

  void stop() {
    stop_requested_ = true;
    if (audio_thread_.joinable()) audio_thread_.join();
    if (telemetry_thread_.joinable()) telemetry_thread_.join();
    hub_.close_all();
    running_ = false;
  }

  /// Blocks until a non-looping file stream has been fully processed.
  void wait_finished() {
    if (audio_thread_.joinable()) audio_thread_.join();
  }

  bool running() const { return running_.load(); }

  std::shared_ptr<const SessionSnapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
  }

  /// Full session state; snap defaults to the current snapshot.
  json state_json(std::shared_ptr<const SessionSnapshot> snap = nullptr) const {
    if (!snap) snap = snapshot();
    json j = to_json(*snap);
    j["engine_config"] = {{"sample_rate_hz", cfg_.sample_rate_hz},
                          {"max_delay_s", cfg_.max_delay_s},
                          {"block_size", cfg_.block_size}};
    j["running"] = running();
    if (cfg_.source.kind == SourceKind::File) {
      j["source"] = {{"kind", "file"}, {"path", cfg_.source.path}, {"loop", cfg_.source.loop}};
    } else {
      j["source"] = {{"kind", "live_stub"}};
    }
    j["telemetry_seq"] = telemetry_seq_.load();
    return j;
  }

  /// Applies a partial update. The patched state is validated as a whole
  /// and either published completely or rejected with a ValidationError.
  std::shared_ptr<const SessionSnapshot> update_params(const json& patch) {
    if (!patch.is_object()) throw ValidationError("body", "must be a JSON object");
    if (patch.contains("mode") && patch.contains("modulation")) {
      throw ValidationError("modulation", "cannot be combined with mode in one patch");
    }
    std::lock_guard writer(writer_mutex_);
    SessionSnapshot next = *snapshot();
    for (const auto& [key, value] : patch.items()) {
      if (is_device_key(key)) {
        apply_device_field(next.device, key, value);
        if (key == "mode") next.control = ControlSource::Device;
      } else if (key == "modulation") {
        next.direct_modulation = modulation_from_json(value, next.direct_modulation);
        next.control = ControlSource::Direct;
      } else if (key == "epoch_s") {
        next.epoch_s = detail::number_field(value, key, "");
        if (next.epoch_s < 0.0) throw ValidationError(key, "must be >= 0");
      } else {
        throw ValidationError(key, "unknown field");
      }
    }
    return publish(resolve(std::move(next)));
  }

  /// Trigger switch. Repeating the current value publishes nothing.
  std::shared_ptr<const SessionSnapshot> trigger(bool pressed) {
    std::lock_guard writer(writer_mutex_);
    auto current = snapshot();
    if (current->device.trigger_pressed == pressed) return current;
    SessionSnapshot next = *current;
    next.device = press_trigger(next.device, pressed);
    return publish(resolve(std::move(next)));
  }

  std::shared_ptr<TelemetrySubscription> subscribe() { return hub_.subscribe(); }
  TelemetryHub& hub() { return hub_; }

  // ---- inspection -------------------------------------------------------

  std::vector<AdoptionRecord> adoption_log() const { return adoption_log_.snapshot(); }

  /// Every published parameter set by version.
  std::map<std::uint64_t, JamParams> params_history() const {
    std::lock_guard lock(history_mutex_);
    std::map<std::uint64_t, JamParams> out;
    for (const auto& [v, entry] : history_) out.emplace(v, entry.params);
    return out;
  }

  /// Processed output of a non-looping file source.
  AudioBuffer captured_output() const {
    if (auto* fb = dynamic_cast<const FileBackend*>(backend_.get())) return fb->captured();
    return {};
  }

 private:
  struct HistoryEntry {
    JamParams params;
    bool clamped = false;
    double distance_m = 0.0;
  };

  static SessionConfig with_stub_source(SessionConfig cfg) {
    cfg.source = SourceConfig{SourceKind::LiveStub, "", true};
    return cfg;
  }

  SessionSnapshot resolve(SessionSnapshot next) const {
    const DeviceResolution res = resolve_params(next.device);
    next.params = res.params;
    next.clamped = res.clamped;
    next.physics_error = res.physics_error;
    if (next.control == ControlSource::Direct) {
      next.params.modulation = next.direct_modulation;
      next.clamped = false;
      next.physics_error.reset();
      try {
        validate(next.direct_modulation, cfg_.max_delay_s);
      } catch (const Error& e) {
        throw ValidationError("modulation", e.what());
      }
    }
    next.params.epoch_s = next.epoch_s;
    return next;
  }

  // Caller holds writer_mutex_ (or is the constructor).
  std::shared_ptr<const SessionSnapshot> publish(SessionSnapshot next) {
    std::uint64_t version = 0;
    try {
      version = engine_.set_params(next.params);
    } catch (const Error& e) {
      throw ValidationError("params", e.what());
    }
    next.version = version;
    {
      std::lock_guard lock(history_mutex_);
      history_[version] = HistoryEntry{next.params, next.clamped, next.device.measured_distance_m};
    }
    auto snap = std::make_shared<const SessionSnapshot>(std::move(next));
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = snap;
    return snap;
  }

  void audio_loop() {
    using clock = std::chrono::steady_clock;
    std::vector<double> in(cfg_.block_size, 0.0);
    std::vector<double> out(cfg_.block_size, 0.0);
    std::uint64_t samples = 0;
    const auto t0 = clock::now();

    while (!stop_requested_) {
      const std::size_t n = backend_->read(in);
      if (n > 0) {
        engine_.process(std::span<const double>(in).first(n), std::span<double>(out).first(n));
        backend_->write(std::span<const double>(out).first(n));
        samples += n;
      }
      if (n < cfg_.block_size) break;
      if (cfg_.speed > 0.0) {
        const double due_s = static_cast<double>(samples) / cfg_.sample_rate_hz / cfg_.speed;
        std::this_thread::sleep_until(t0 + std::chrono::duration_cast<clock::duration>(
                                               std::chrono::duration<double>(due_s)));
      }
    }
    backend_->finish();
    if (cfg_.output_path && cfg_.source.kind == SourceKind::File && !cfg_.source.loop) {
      try {
        write_wav(*cfg_.output_path, captured_output());
      } catch (const Error&) {
        // Reported through the running flag only; there is no caller to throw to.
      }
    }
    running_ = false;
  }

  void telemetry_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / cfg_.telemetry_hz));
    auto next_tick = clock::now();
    EngineStatus status;
    while (!stop_requested_) {
      next_tick += period;
      std::this_thread::sleep_until(next_tick);
      engine_.poll_status(status);
      hub_.broadcast(make_frame(status));
      if (!running_) break;
    }
  }

  TelemetryFrame make_frame(const EngineStatus& st) {
    TelemetryFrame f;
    f.seq = ++telemetry_seq_;
    f.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time_).count();
    f.stream_time_s = static_cast<double>(st.samples_processed) / cfg_.sample_rate_hz;
    f.schedule_time_s = st.schedule_time_s;
    f.instantaneous_delay_ms = st.delay_s * 1000.0;
    f.muted = st.muted;
    f.rms_in_db = st.rms_in_db;
    f.rms_out_db = st.muted ? kSilenceDb : st.rms_out_db;
    f.params_version = st.params_version;
    {
      // Geometry and clamp flag of the version the audio path is running.
      std::lock_guard lock(history_mutex_);
      if (auto it = history_.find(st.params_version); it != history_.end()) {
        f.distance_m = it->second.distance_m;
        f.clamped = it->second.clamped;
      }
    }
    return f;
  }

  SessionConfig cfg_;
  Engine engine_;
  AdoptionLog adoption_log_;
  TelemetryHub hub_;
  std::unique_ptr<AudioBackend> backend_;

  std::mutex writer_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const SessionSnapshot> snapshot_;
  mutable std::mutex history_mutex_;
  std::map<std::uint64_t, HistoryEntry> history_;

  std::atomic<bool> started_{false};
  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> telemetry_seq_{0};
  std::chrono::steady_clock::time_point start_time_{};
  std::thread audio_thread_;
  std::thread telemetry_thread_;
};

}  // namespace dafjam::control
