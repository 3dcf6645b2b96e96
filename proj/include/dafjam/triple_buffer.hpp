#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <type_traits>

namespace dafjam {

/// Single-producer / single-consumer latest-value mailbox. The producer
/// publishes complete values; the consumer picks up the newest complete one.
/// Neither side blocks, allocates, or can observe a partially written value.
///
/// Three slots: the producer owns one, the consumer owns one, and the third
/// sits in the middle. Publishing swaps the producer slot with the middle;
/// consuming swaps the consumer slot with the middle if it is fresh.
template <class T>
class TripleBuffer {
  static_assert(std::is_copy_assignable_v<T>);

 public:
  explicit TripleBuffer(const T& initial = T{}) { slots_.fill(initial); }

  TripleBuffer(const TripleBuffer&) = delete;
  TripleBuffer& operator=(const TripleBuffer&) = delete;

  // Producer side.
  void publish(const T& value) {
    slots_[back_] = value;
    const std::uint8_t prev = middle_.exchange(static_cast<std::uint8_t>(back_ | kFresh),
                                               std::memory_order_acq_rel);
    back_ = prev & kIndexMask;
  }

  // Consumer side. Returns true when a newer value was picked up.
  bool update() {
    if ((middle_.load(std::memory_order_relaxed) & kFresh) == 0) return false;
    const std::uint8_t prev = middle_.exchange(front_, std::memory_order_acq_rel);
    front_ = prev & kIndexMask;
    return true;
  }

  const T& read() const { return slots_[front_]; }

 private:
  static constexpr std::uint8_t kFresh = 0x4;
  static constexpr std::uint8_t kIndexMask = 0x3;

  std::array<T, 3> slots_{};
  std::uint8_t back_ = 0;
  std::uint8_t front_ = 1;
  std::atomic<std::uint8_t> middle_{2};
};

}  // namespace dafjam
