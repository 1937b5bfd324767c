// Single-producer single-consumer channel that keeps only the most recent
// value: the 1 kHz loop publishes state snapshots, the 100 Hz estimator loop
// takes the latest and never sees a backlog.

#pragma once

#include <mutex>
#include <optional>
#include <utility>

namespace contact2d {

template <class T>
class LatestSnapshotChannel {
  public:
    void publish(T value) {
        std::lock_guard<std::mutex> lock(mutex_);
        slot_ = std::move(value);
    }

    // removes and returns the latest value, if any
    std::optional<T> take() {
        std::lock_guard<std::mutex> lock(mutex_);
        std::optional<T> out = std::move(slot_);
        slot_.reset();
        return out;
    }

    // returns a copy of the latest value without consuming it
    std::optional<T> peek() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return slot_;
    }

  private:
    mutable std::mutex mutex_;
    std::optional<T> slot_;
};

}  // namespace contact2d
