#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>

namespace pbrnn {

// Raised when a loss evaluation is requested past the forward-pass cap.
// Trainers check remaining() before starting an iteration, so in normal runs
// this fires only on a broken accounting assumption.
struct BudgetExhausted : std::runtime_error {
  BudgetExhausted() : std::runtime_error("forward-pass budget exhausted") {}
};

// Counts full feed-forward passes over the training split, the unit of
// computational budget. Thread-safe; used is monotonically non-decreasing.
class BudgetMeter {
 public:
  explicit BudgetMeter(std::uint64_t cap) : cap_(cap) {}

  BudgetMeter(const BudgetMeter&) = delete;
  BudgetMeter& operator=(const BudgetMeter&) = delete;

  std::uint64_t cap() const { return cap_; }
  std::uint64_t used() const { return used_.load(std::memory_order_relaxed); }
  std::uint64_t remaining() const {
    const std::uint64_t u = used();
    return u >= cap_ ? 0 : cap_ - u;
  }
  bool has(std::uint64_t n) const { return remaining() >= n; }

  void consume(std::uint64_t n = 1) {
    std::uint64_t cur = used_.load(std::memory_order_relaxed);
    while (true) {
      if (cur + n > cap_) {
        throw BudgetExhausted{};
      }
      if (used_.compare_exchange_weak(cur, cur + n, std::memory_order_relaxed)) {
        return;
      }
    }
  }

 private:
  std::atomic<std::uint64_t> used_{0};
  std::uint64_t cap_;
};

}  // namespace pbrnn
