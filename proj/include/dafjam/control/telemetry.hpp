#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "dafjam/json_io.hpp"

namespace dafjam::control {

struct TelemetryFrame {
  std::uint64_t seq = 0;
  double wall_time_s = 0.0;      // seconds since the session started
  double stream_time_s = 0.0;    // audio processed so far
  double schedule_time_s = 0.0;  // T of the delay schedule at the last sample
  double instantaneous_delay_ms = 0.0;
  bool muted = true;
  double rms_in_db = kSilenceDb;
  double rms_out_db = kSilenceDb;
  double distance_m = 0.0;
  bool clamped = false;
  std::uint64_t params_version = 0;
};

inline json to_json(const TelemetryFrame& f) {
  return {{"seq", f.seq},
          {"wall_time_s", f.wall_time_s},
          {"stream_time_s", f.stream_time_s},
          {"schedule_time_s", f.schedule_time_s},
          {"instantaneous_delay_ms", f.instantaneous_delay_ms},
          {"muted", f.muted},
          {"rms_in_db", f.rms_in_db},
          {"rms_out_db", f.rms_out_db},
          {"distance_m", f.distance_m},
          {"clamped", f.clamped},
          {"params_version", f.params_version}};
}

/// Bounded frame queue for one subscriber. A subscriber that lets the queue
/// fill up is marked overflowed and receives nothing more.
class TelemetrySubscription {
 public:
  explicit TelemetrySubscription(std::size_t capacity) : capacity_(capacity) {}

  /// Producer side; returns false once the subscriber is closed or overflowed.
  bool push(const TelemetryFrame& frame) {
    {
      std::lock_guard lock(mutex_);
      if (closed_ || overflowed_) return false;
      if (queue_.size() >= capacity_) {
        overflowed_ = true;
        queue_.clear();
      } else {
        queue_.push_back(frame);
      }
    }
    cv_.notify_all();
    return !overflowed();
  }

  /// Waits up to timeout for the next frame.
  std::optional<TelemetryFrame> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_ || overflowed_; });
    if (queue_.empty()) return std::nullopt;
    TelemetryFrame f = queue_.front();
    queue_.pop_front();
    return f;
  }

  std::optional<TelemetryFrame> try_pop() { return pop(std::chrono::milliseconds(0)); }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool overflowed() const {
    std::lock_guard lock(mutex_);
    return overflowed_;
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<TelemetryFrame> queue_;
  bool closed_ = false;
  bool overflowed_ = false;
};

/// Fans frames out to subscribers, dropping ones that closed or overflowed.
class TelemetryHub {
 public:
  explicit TelemetryHub(std::size_t queue_capacity) : queue_capacity_(queue_capacity) {}

  std::shared_ptr<TelemetrySubscription> subscribe() {
    auto sub = std::make_shared<TelemetrySubscription>(queue_capacity_);
    std::lock_guard lock(mutex_);
    subscribers_.push_back(sub);
    return sub;
  }

  void broadcast(const TelemetryFrame& frame) {
    std::lock_guard lock(mutex_);
    std::erase_if(subscribers_, [&](const std::weak_ptr<TelemetrySubscription>& w) {
      auto sub = w.lock();
      return !sub || !sub->push(frame);
    });
  }

  void close_all() {
    std::lock_guard lock(mutex_);
    for (auto& w : subscribers_) {
      if (auto sub = w.lock()) sub->close();
    }
    subscribers_.clear();
  }

  std::size_t subscriber_count() const {
    std::lock_guard lock(mutex_);
    return subscribers_.size();
  }

 private:
  std::size_t queue_capacity_;
  mutable std::mutex mutex_;
  std::vector<std::weak_ptr<TelemetrySubscription>> subscribers_;
};

}  // namespace dafjam::control
