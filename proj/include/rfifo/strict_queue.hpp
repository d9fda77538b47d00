#pragma once

#include "rfifo/element.hpp"
#include "rfifo/op_log.hpp"

#include <cstddef>
#include <mutex>
#include <optional>
#include <vector>

namespace rfifo {

/// Bounded circular buffer behind a single mutex. Exact FIFO order; used as
/// the correctness oracle and the non-scaling throughput baseline.
class StrictQueue {
    mutable std::mutex mutex_;
    std::vector<Element> buffer_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;

   public:
    class Handle {
        friend StrictQueue;
        StrictQueue *queue_;
        OpLog *log_ = nullptr;

        explicit Handle(StrictQueue &q) noexcept : queue_(&q) {
        }

       public:
        Handle(Handle const &) = delete;
        Handle &operator=(Handle const &) = delete;
        Handle(Handle &&) noexcept = default;
        Handle &operator=(Handle &&) noexcept = default;

        bool push(Element e) {
            return queue_->push(e, log_);
        }
        std::optional<Element> try_pop() {
            return queue_->pop(log_);
        }
        void attach_log(OpLog *log) noexcept {
            log_ = log;
        }
    };

    explicit StrictQueue(std::size_t capacity);

    Handle get_handle(std::size_t /*thread_id*/) noexcept {
        return Handle{*this};
    }

    /// False iff the queue is full. Requires e != kBottom.
    bool push(Element e, OpLog *log = nullptr);

    /// Oldest element, or nullopt iff empty.
    std::optional<Element> pop(OpLog *log = nullptr);

    [[nodiscard]] std::size_t capacity() const noexcept {
        return buffer_.size();
    }
    [[nodiscard]] std::size_t size() const;
};

static_assert(ConcurrentQueue<StrictQueue>);

}  // namespace rfifo
