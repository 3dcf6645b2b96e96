#pragma once

// Sample-accurate variable delay line: the signal path of the jammer.
//
// out[n] = g_out * lerp(mem, n - D(T_n) * fs), mem[n] = g_in * in[n]
//
// D(T) comes from the active ModulationSpec and is evaluated per sample.
// Parameter sets are published from a control thread and adopted by the audio
// path at block boundaries; the audio path never locks or allocates.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "dafjam/audio_buffer.hpp"
#include "dafjam/error.hpp"
#include "dafjam/gain.hpp"
#include "dafjam/modulation.hpp"
#include "dafjam/physics.hpp"
#include "dafjam/triple_buffer.hpp"

namespace dafjam {

/// Full engine configuration. environment and path do not affect the engine
/// itself; they travel with the parameters so the simulator and telemetry
/// can reconstruct the acoustic geometry.
struct JamParams {
  ModulationSpec modulation = ModulationSpec::fixed(0.1);
  GainStage gains{};
  Environment environment{};
  PathModel path = PathModel::round_trip();
  // Schedule time T at the moment the parameters are adopted.
  double epoch_s = 0.0;

  friend bool operator==(const JamParams&, const JamParams&) = default;
};

inline void validate(const JamParams& p, double capacity_s) {
  validate(p.modulation, capacity_s);
  validate(p.gains);
  validate(p.environment);
  if (!std::isfinite(p.epoch_s) || p.epoch_s < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "epoch_s must be finite and >= 0");
  }
}

/// Snapshot of the audio path after a block, for telemetry.
struct EngineStatus {
  std::uint64_t samples_processed = 0;
  std::uint64_t blocks_processed = 0;
  double schedule_time_s = 0.0;  // T of the last processed sample
  double delay_s = 0.0;          // instantaneous delay of the last processed sample
  double rms_in_db = kSilenceDb;
  double rms_out_db = kSilenceDb;
  bool muted = true;
  std::uint64_t params_version = 0;
};

/// One parameter adoption by the audio path.
struct AdoptionRecord {
  std::uint64_t block_index = 0;
  std::uint64_t start_sample = 0;
  std::uint64_t version = 0;
  JamParams params{};
};

/// Fixed-capacity append-only log written by the audio thread and readable
/// concurrently. Entries past capacity are counted but dropped.
class AdoptionLog {
 public:
  explicit AdoptionLog(std::size_t capacity) : records_(capacity) {}

  void push(const AdoptionRecord& r) noexcept {
    const std::size_t n = size_.load(std::memory_order_relaxed);
    if (n >= records_.size()) {
      dropped_.fetch_add(1, std::memory_order_relaxed);
      return;
    }
    records_[n] = r;
    size_.store(n + 1, std::memory_order_release);
  }

  std::vector<AdoptionRecord> snapshot() const {
    const std::size_t n = size_.load(std::memory_order_acquire);
    return {records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(n)};
  }

  std::size_t dropped() const { return dropped_.load(std::memory_order_relaxed); }

 private:
  std::vector<AdoptionRecord> records_;
  std::atomic<std::size_t> size_{0};
  std::atomic<std::size_t> dropped_{0};
};

class Engine {
 public:
  static constexpr int kMinSampleRateHz = 8000;
  static constexpr int kMaxSampleRateHz = 192000;
  static constexpr double kMaxCapacityS = 2.0;
  static constexpr double kSlewTimeS = 0.010;

  Engine(int sample_rate_hz, double max_delay_s)
      : sample_rate_hz_(checked_rate(sample_rate_hz)),
        max_delay_s_(checked_capacity(max_delay_s)),
        memory_(static_cast<std::size_t>(std::ceil(max_delay_s * sample_rate_hz)) + 2, 0.0),
        slew_len_(std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::lround(kSlewTimeS * sample_rate_hz)))),
        mailbox_(Published{0, default_params(max_delay_s)}),
        status_box_(EngineStatus{}) {
    active_ = mailbox_.read().params;
    current_delay_s_ = active_.modulation.base_s;
    adopt_gains();
  }

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Fresh engine: Fixed(0.1 s) (or the capacity, if smaller), 0 dB, muted.
  static JamParams default_params(double max_delay_s) {
    JamParams p;
    p.modulation = ModulationSpec::fixed(std::min(0.1, max_delay_s));
    p.gains = GainStage{0.0, 0.0, true};
    return p;
  }

  int sample_rate_hz() const { return sample_rate_hz_; }
  double max_delay_s() const { return max_delay_s_; }
  std::size_t memory_size() const { return memory_.size(); }
  std::uint64_t slew_samples() const { return slew_len_; }

  // ---- control side (one thread at a time) --------------------------------

  /// Validates and publishes a parameter set. The audio path adopts the
  /// newest published set at its next block boundary. Returns the version.
  std::uint64_t set_params(const JamParams& params) {
    validate(params, max_delay_s_);
    const std::uint64_t version = ++published_version_;
    mailbox_.publish(Published{version, params});
    return version;
  }

  /// Consumer side of the status mailbox (one telemetry thread).
  bool poll_status(EngineStatus& out) {
    if (!status_box_.update()) return false;
    out = status_box_.read();
    return true;
  }

  void attach_adoption_log(AdoptionLog* log) { adoption_log_ = log; }

  // ---- audio side -----------------------------------------------------------

  /// Processes one block. in and out must have the same length and may alias.
  void process(std::span<const double> in, std::span<double> out) noexcept {
    adopt_pending();

    const double fs = sample_rate_hz_;
    const std::size_t size = memory_.size();
    double in_energy = 0.0;
    double out_energy = 0.0;

    for (std::size_t n = 0; n < in.size(); ++n) {
      const double x = in[n];
      in_energy += x * x;
      memory_[write_] = gain_in_ * x;

      const double d = std::clamp(next_delay(), 0.0, max_delay_s_);
      current_delay_s_ = d;

      double pos = d * fs;
      const double nearest = std::round(pos);
      if (std::abs(pos - nearest) < kSnap) pos = nearest;
      const auto whole = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(whole);

      const std::size_t a = (write_ + size - whole) % size;
      const std::size_t b = (a + size - 1) % size;
      const double y = (1.0 - frac) * memory_[a] + frac * memory_[b];

      const double o = active_.gains.muted ? 0.0 : gain_out_ * y;
      out[n] = o;
      out_energy += o * o;

      write_ = write_ + 1 == size ? 0 : write_ + 1;
    }

    samples_processed_ += in.size();
    ++blocks_processed_;

    EngineStatus st;
    st.samples_processed = samples_processed_;
    st.blocks_processed = blocks_processed_;
    st.schedule_time_s = last_schedule_time_s_;
    st.delay_s = current_delay_s_;
    st.rms_in_db = level_db(in_energy, in.size());
    st.rms_out_db = level_db(out_energy, in.size());
    st.muted = active_.gains.muted;
    st.params_version = active_version_;
    status_box_.publish(st);
  }

  AudioBuffer process_block(const AudioBuffer& input) {
    if (input.sample_rate_hz != sample_rate_hz_) {
      std::ostringstream os;
      os << "input at " << input.sample_rate_hz << " Hz, engine at " << sample_rate_hz_ << " Hz";
      throw Error(ErrorKind::SampleRateMismatch, os.str());
    }
    AudioBuffer out(sample_rate_hz_, input.size());
    process(input.samples, out.samples);
    return out;
  }

  /// Parameters the audio path is currently running (audio side only).
  const JamParams& active_params() const { return active_; }
  std::uint64_t active_version() const { return active_version_; }
  double current_delay_s() const { return current_delay_s_; }
  std::uint64_t samples_processed() const { return samples_processed_; }

 private:
  struct Published {
    std::uint64_t version = 0;
    JamParams params{};
  };

  // Sub-1e-10-sample offsets are representation noise from d * fs.
  static constexpr double kSnap = 1e-10;

  static int checked_rate(int rate) {
    if (rate < kMinSampleRateHz || rate > kMaxSampleRateHz) {
      std::ostringstream os;
      os << "sample rate " << rate << " Hz outside [" << kMinSampleRateHz << ", "
         << kMaxSampleRateHz << "]";
      throw Error(ErrorKind::InvalidConfig, os.str());
    }
    return rate;
  }

  static double checked_capacity(double max_delay_s) {
    if (!(max_delay_s > 0.0) || max_delay_s > kMaxCapacityS) {
      std::ostringstream os;
      os << "max delay " << max_delay_s << " s outside (0, " << kMaxCapacityS << "]";
      throw Error(ErrorKind::InvalidConfig, os.str());
    }
    return max_delay_s;
  }

  static double level_db(double sum_sq, std::size_t n) {
    if (n == 0 || sum_sq <= 0.0) return kSilenceDb;
    return std::max(kSilenceDb, 10.0 * std::log10(sum_sq / static_cast<double>(n)));
  }

  void adopt_gains() {
    gain_in_ = std::pow(10.0, active_.gains.input_gain_db / 20.0);
    gain_out_ = std::pow(10.0, active_.gains.output_gain_db / 20.0);
  }

  void adopt_pending() noexcept {
    if (!mailbox_.update()) return;
    const Published& next = mailbox_.read();
    if (next.version == active_version_) return;

    const bool schedule_changed = !(next.params.modulation == active_.modulation &&
                                    next.params.epoch_s == active_.epoch_s);
    if (schedule_changed) {
      schedule_samples_ = 0;
      slewing_ = false;
      if (next.params.modulation.is_fixed() && samples_processed_ > 0 &&
          current_delay_s_ != next.params.modulation.base_s) {
        slewing_ = true;
        slew_from_ = current_delay_s_;
        slew_pos_ = 0;
      }
    }
    active_ = next.params;
    active_version_ = next.version;
    adopt_gains();

    if (adoption_log_ != nullptr) {
      adoption_log_->push(
          AdoptionRecord{blocks_processed_, samples_processed_, active_version_, active_});
    }
  }

  double next_delay() noexcept {
    const double t = active_.epoch_s + static_cast<double>(schedule_samples_) / sample_rate_hz_;
    ++schedule_samples_;
    last_schedule_time_s_ = t;
    if (slewing_) {
      ++slew_pos_;
      const double target = active_.modulation.base_s;
      if (slew_pos_ >= slew_len_) {
        slewing_ = false;
        return target;
      }
      return slew_from_ +
             (target - slew_from_) * static_cast<double>(slew_pos_) / static_cast<double>(slew_len_);
    }
    return delay_at(active_.modulation, t);
  }

  int sample_rate_hz_;
  double max_delay_s_;
  std::vector<double> memory_;
  std::size_t write_ = 0;

  // audio-side state
  JamParams active_{};
  std::uint64_t active_version_ = 0;
  double gain_in_ = 1.0;
  double gain_out_ = 1.0;
  double current_delay_s_ = 0.0;
  double last_schedule_time_s_ = 0.0;
  std::uint64_t schedule_samples_ = 0;
  std::uint64_t samples_processed_ = 0;
  std::uint64_t blocks_processed_ = 0;
  bool slewing_ = false;
  double slew_from_ = 0.0;
  std::uint64_t slew_pos_ = 0;
  std::uint64_t slew_len_;
  AdoptionLog* adoption_log_ = nullptr;

  // control-side state
  std::uint64_t published_version_ = 0;

  TripleBuffer<Published> mailbox_;
  TripleBuffer<EngineStatus> status_box_;
};

inline Engine create_engine(int sample_rate_hz, double max_delay_s) {
  return Engine(sample_rate_hz, max_delay_s);
}

}  // namespace dafjam
