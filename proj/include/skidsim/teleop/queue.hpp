#pragma once

#include <deque>
#include <mutex>
#include <vector>

namespace skidsim::teleop {

// Mutex-guarded FIFO between the network thread and the sim loop. When full,
// the oldest entry is dropped.
template <class T>
class MessageQueue {
 public:
  explicit MessageQueue(std::size_t capacity = 1024) : capacity_(capacity) {}

  // Returns false if an old entry had to be dropped to make room.
  bool push(T value) {
    std::lock_guard lock(mutex_);
    bool kept_all = true;
    if (items_.size() >= capacity_) {
      items_.pop_front();
      kept_all = false;
    }
    items_.push_back(std::move(value));
    return kept_all;
  }

  std::vector<T> drain() {
    std::lock_guard lock(mutex_);
    std::vector<T> out(std::make_move_iterator(items_.begin()),
                       std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<T> items_;
  std::size_t capacity_;
};

}  // namespace skidsim::teleop
