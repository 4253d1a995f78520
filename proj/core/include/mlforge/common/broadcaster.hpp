#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <mlforge/common/clock.hpp>

namespace mlforge {

/// Fan-out of an ordered item stream to any number of subscribers.
///
/// Publishing never blocks: each subscriber owns a bounded buffer, and one
/// that falls `capacity` items behind is cut off with its overflow flag set.
/// The full history is retained so late subscribers can ask for a replay.
template <class T>
class Broadcaster {
public:
    class Subscription {
    public:
        /// Waits up to `timeout` for the next item. nullopt on timeout or once
        /// the stream is finished (check `finished()` to tell them apart).
        std::optional<T> next(Duration timeout) {
            std::unique_lock lock(mutex_);
            cv_.wait_for(lock, timeout, [&] { return !items_.empty() || done_; });
            if (items_.empty()) {
                return std::nullopt;
            }
            T item = std::move(items_.front());
            items_.pop_front();
            return item;
        }

        std::optional<T> try_next() { return next(Duration{0}); }

        /// True once no further items will arrive and the buffer is drained.
        bool finished() const {
            std::lock_guard lock(mutex_);
            return done_ && items_.empty();
        }

        bool overflowed() const {
            std::lock_guard lock(mutex_);
            return overflowed_;
        }

        /// Stops delivery to this subscriber.
        void cancel() {
            std::lock_guard lock(mutex_);
            done_ = true;
            cv_.notify_all();
        }

    private:
        friend class Broadcaster;

        // Returns false if the subscriber is gone or was cut off.
        bool offer(const T& item) {
            std::lock_guard lock(mutex_);
            if (done_) {
                return false;
            }
            if (filter_ && !filter_(item)) {
                return true;
            }
            if (items_.size() >= capacity_) {
                overflowed_ = true;
                done_ = true;
                cv_.notify_all();
                return false;
            }
            items_.push_back(item);
            cv_.notify_all();
            return true;
        }

        void finish() {
            std::lock_guard lock(mutex_);
            done_ = true;
            cv_.notify_all();
        }

        mutable std::mutex mutex_;
        std::condition_variable cv_;
        std::deque<T> items_;
        std::function<bool(const T&)> filter_;
        std::size_t capacity_ = 0;
        bool done_ = false;
        bool overflowed_ = false;
    };

    explicit Broadcaster(std::size_t buffer_capacity = 1024) : buffer_capacity_(buffer_capacity) {}

    /// Attaches a subscriber and replays the last `replay` matching items.
    std::shared_ptr<Subscription> subscribe(std::size_t replay,
                                            std::function<bool(const T&)> filter = {}) {
        auto sub = std::make_shared<Subscription>();
        std::lock_guard lock(mutex_);
        sub->filter_ = std::move(filter);
        std::vector<const T*> tail;
        for (auto it = history_.rbegin(); it != history_.rend() && tail.size() < replay; ++it) {
            if (!sub->filter_ || sub->filter_(*it)) {
                tail.push_back(&*it);
            }
        }
        sub->capacity_ = buffer_capacity_ + tail.size();
        for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
            sub->items_.push_back(**it);
        }
        if (closed_) {
            sub->done_ = true;
        } else {
            subscribers_.push_back(sub);
        }
        return sub;
    }

    void publish(const T& item) {
        std::lock_guard lock(mutex_);
        history_.push_back(item);
        std::erase_if(subscribers_, [&](const auto& sub) { return !sub->offer(item); });
    }

    /// Ends the stream for current subscribers; later subscribers get replay only.
    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        for (auto& sub : subscribers_) {
            sub->finish();
        }
        subscribers_.clear();
    }

    bool closed() const {
        std::lock_guard lock(mutex_);
        return closed_;
    }

    std::size_t subscriber_count() const {
        std::lock_guard lock(mutex_);
        return subscribers_.size();
    }

private:
    mutable std::mutex mutex_;
    std::size_t buffer_capacity_;
    std::deque<T> history_;
    std::vector<std::shared_ptr<Subscription>> subscribers_;
    bool closed_ = false;
};

} // namespace mlforge
