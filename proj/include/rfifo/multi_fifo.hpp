#pragma once

#include "rfifo/detail/aligned_buffer.hpp"
#include "rfifo/element.hpp"
#include "rfifo/hooks.hpp"
#include "rfifo/op_log.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>

namespace rfifo {

struct MultiFifoParams {
    std::size_t threads = 1;         // p
    std::size_t queue_factor = 2;    // c, sub-queues per thread (>= 2)
    std::size_t stickiness = 1;      // s, operations per queue choice (>= 1)
    std::size_t queue_capacity = 0;  // m per sub-queue, rounded up to a power of two; 0 = 1024
    std::uint64_t seed = 1;
};

/// Expected rank error of the two-choice process over c * p queues:
/// 5/6 cp - 1 + 1/(6 cp).
double mf_rank_error_expectation(std::size_t queue_factor, std::size_t threads);

/// Relaxed FIFO made of c * p lock-protected ring buffers of timestamped
/// elements. Pushes append to one random sub-queue, pops remove the older head
/// of two random sub-queues. Both choices are reused for s operations.
class MultiFifo {
   public:
    static constexpr std::uint64_t kEmptyStamp = std::numeric_limits<std::uint64_t>::max();

    struct StampedElement {
        std::uint64_t stamp;
        Element value;
    };

    class Handle {
        friend MultiFifo;

        MultiFifo *fifo_;
        Rng rng_;
        std::size_t push_queue_ = 0;
        std::size_t push_uses_ = 0;
        std::array<std::size_t, 2> pop_pair_{0, 0};
        std::size_t pop_uses_ = 0;
        OpLog *log_ = nullptr;

        Handle(MultiFifo &fifo, Rng rng) noexcept : fifo_(&fifo), rng_(rng) {
        }

        void refresh_push_queue() noexcept;
        void refresh_pop_pair() noexcept;
        bool push_scan(Element e);

       public:
        Handle(Handle const &) = delete;
        Handle &operator=(Handle const &) = delete;
        Handle(Handle &&) noexcept = default;
        Handle &operator=(Handle &&) noexcept = default;

        /// False iff every sub-queue was found full. Requires e != kBottom.
        bool push(Element e);
        /// nullopt iff one full scan saw every sub-queue empty.
        std::optional<Element> try_pop();

        void attach_log(OpLog *log) noexcept {
            log_ = log;
        }
        /// Sub-queue used by the last successful push.
        [[nodiscard]] std::size_t last_push_queue() const noexcept {
            return push_queue_;
        }
    };

    explicit MultiFifo(MultiFifoParams const &params);

    MultiFifo(MultiFifo const &) = delete;
    MultiFifo &operator=(MultiFifo const &) = delete;

    Handle get_handle(std::size_t thread_id);

    [[nodiscard]] std::size_t num_queues() const noexcept {
        return num_queues_;
    }
    [[nodiscard]] std::size_t queue_capacity() const noexcept {
        return mask_ + 1;
    }
    [[nodiscard]] std::size_t capacity() const noexcept {
        return num_queues_ * (mask_ + 1);
    }
    [[nodiscard]] MultiFifoParams const &params() const noexcept {
        return params_;
    }

    /// Cached head timestamp of sub-queue i (kEmptyStamp when empty).
    [[nodiscard]] std::uint64_t head_stamp(std::size_t i) const noexcept {
        return queues_[i].head_stamp.load(std::memory_order_acquire);
    }

    /// Quiescent-state check of the sub-queue invariants: stamps strictly
    /// increase from head to tail and the cached head stamp is exact.
    [[nodiscard]] bool check_invariants() const;

    /// Number of stored elements. Quiescent use only.
    [[nodiscard]] std::size_t size() const;

    void set_hook(Hook *hook) noexcept {
        hook_ = hook;
    }

   private:
    struct alignas(kCacheLine) SubQueue {
        std::atomic<bool> locked{false};
        std::atomic<std::uint64_t> head_stamp{kEmptyStamp};
        std::size_t head = 0;
        std::size_t size = 0;
        std::unique_ptr<StampedElement[]> buffer;

        bool try_lock() noexcept {
            return !locked.load(std::memory_order_relaxed) && !locked.exchange(true, std::memory_order_acquire);
        }
        void lock() noexcept {
            while (!try_lock()) {
            }
        }
        void unlock() noexcept {
            locked.store(false, std::memory_order_release);
        }
    };

    // Appends under the lock with a fresh timestamp.
    void append_locked(SubQueue &q, Element e, OpLog *log);

    MultiFifoParams params_;
    std::size_t num_queues_;
    std::size_t mask_;
    std::size_t empty_retries_;
    Hook *hook_ = nullptr;
    detail::AlignedBuffer<SubQueue> queues_;
    alignas(kCacheLine) std::atomic<std::uint64_t> clock_{0};
};

static_assert(ConcurrentQueue<MultiFifo>);

}  // namespace rfifo
