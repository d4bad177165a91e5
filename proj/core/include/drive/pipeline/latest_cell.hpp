#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stop_token>

namespace drive::pipeline {

/// Single-slot mailbox between two stages. offer() replaces whatever the slot
/// holds and hands the displaced item back; take() empties the slot. Safe for
/// one writer and one reader running concurrently.
template <typename T>
class LatestCell {
 public:
  // Never blocks on the reader. Returns the item that was overwritten, if any.
  std::optional<T> offer(T value) {
    std::optional<T> displaced;
    {
      std::lock_guard lock(mu_);
      if (slot_) {
        displaced = std::move(slot_);
        ++replaced_;
      }
      slot_ = std::move(value);
    }
    cv_.notify_all();
    return displaced;
  }

  // Lossless variant used in lockstep mode: waits until the slot is free.
  // Returns false when the cell was closed or the stop was requested.
  bool offer_wait(T value, std::stop_token st) {
    std::unique_lock lock(mu_);
    // The stop-token overload registers its wake-up under the lock, so a stop
    // request cannot slip between the predicate check and the wait.
    if (!cv_.wait(lock, st, [&] { return !slot_ || closed_; }) || closed_) return false;
    slot_ = std::move(value);
    lock.unlock();
    cv_.notify_all();
    return true;
  }

  std::optional<T> take() {
    std::optional<T> out;
    {
      std::lock_guard lock(mu_);
      out.swap(slot_);
    }
    if (out) cv_.notify_all();
    return out;
  }

  // Blocks until an item arrives, the cell is closed and drained, or stop.
  std::optional<T> wait_take(std::stop_token st) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, st, [&] { return slot_.has_value() || closed_; });
    std::optional<T> out;
    out.swap(slot_);
    lock.unlock();
    if (out) cv_.notify_all();
    return out;
  }

  template <typename Rep, typename Period>
  std::optional<T> wait_take_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return slot_.has_value() || closed_; });
    std::optional<T> out;
    out.swap(slot_);
    lock.unlock();
    if (out) cv_.notify_all();
    return out;
  }

  // Wakes waiters; items already offered can still be taken.
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }
  bool empty() const {
    std::lock_guard lock(mu_);
    return !slot_;
  }
  std::uint64_t replaced() const {
    std::lock_guard lock(mu_);
    return replaced_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable_any cv_;
  std::optional<T> slot_;
  bool closed_ = false;
  std::uint64_t replaced_ = 0;
};

}  // namespace drive::pipeline
