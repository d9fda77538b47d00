#include "rfifo/multi_fifo.hpp"

#include <bit>
#include <cassert>
#include <stdexcept>

namespace rfifo {

double mf_rank_error_expectation(std::size_t queue_factor, std::size_t threads) {
    if (queue_factor < 2 || threads < 1) {
        throw std::invalid_argument("mf_rank_error_expectation: requires c >= 2 and p >= 1");
    }
    auto const n = static_cast<double>(queue_factor * threads);
    return 5.0 / 6.0 * n - 1.0 + 1.0 / (6.0 * n);
}

MultiFifo::MultiFifo(MultiFifoParams const &params)
    : params_(params),
      num_queues_(params.queue_factor * params.threads),
      mask_(std::bit_ceil(params.queue_capacity == 0 ? std::size_t{1024} : params.queue_capacity) - 1),
      empty_retries_(num_queues_),
      queues_(num_queues_) {
    if (params.threads == 0 || params.queue_factor < 2 || params.stickiness == 0) {
        throw std::invalid_argument("MultiFifo: requires p >= 1, c >= 2, s >= 1");
    }
    for (std::size_t i = 0; i < num_queues_; ++i) {
        queues_[i].buffer = std::make_unique<StampedElement[]>(mask_ + 1);
    }
}

MultiFifo::Handle MultiFifo::get_handle(std::size_t thread_id) {
    return Handle{*this, make_rng(params_.seed, thread_id)};
}

void MultiFifo::append_locked(SubQueue &q, Element e, OpLog *log) {
    // Stamped under the lock so stamps increase along every sub-queue.
    auto const stamp = clock_.fetch_add(1, std::memory_order_relaxed);
    q.buffer[(q.head + q.size) & mask_] = StampedElement{stamp, e};
    if (q.size++ == 0) {
        q.head_stamp.store(stamp, std::memory_order_release);
    }
    if (log != nullptr) {
        log->record(OpKind::push, e);
    }
}

bool MultiFifo::check_invariants() const {
    for (std::size_t i = 0; i < num_queues_; ++i) {
        auto const &q = queues_[i];
        if (q.size == 0) {
            if (q.head_stamp.load() != kEmptyStamp) {
                return false;
            }
            continue;
        }
        if (q.head_stamp.load() != q.buffer[q.head].stamp) {
            return false;
        }
        for (std::size_t j = 1; j < q.size; ++j) {
            if (q.buffer[(q.head + j) & mask_].stamp <= q.buffer[(q.head + j - 1) & mask_].stamp) {
                return false;
            }
        }
    }
    return true;
}

std::size_t MultiFifo::size() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < num_queues_; ++i) {
        total += queues_[i].size;
    }
    return total;
}

void MultiFifo::Handle::refresh_push_queue() noexcept {
    push_queue_ = random_index(rng_, fifo_->num_queues_);
    push_uses_ = fifo_->params_.stickiness;
}

void MultiFifo::Handle::refresh_pop_pair() noexcept {
    auto const n = fifo_->num_queues_;
    auto const a = random_index(rng_, n);
    auto b = random_index(rng_, n - 1);
    if (b >= a) {
        ++b;
    }
    pop_pair_ = {a, b};
    pop_uses_ = fifo_->params_.stickiness;
}

bool MultiFifo::Handle::push_scan(Element e) {
    auto &mf = *fifo_;
    for (std::size_t j = 1; j <= mf.num_queues_; ++j) {
        auto const idx = (push_queue_ + j) % mf.num_queues_;
        auto &q = mf.queues_[idx];
        q.lock();
        if (q.size <= mf.mask_) {
            mf.append_locked(q, e, log_);
            q.unlock();
            push_queue_ = idx;
            push_uses_ = 0;
            return true;
        }
        q.unlock();
    }
    push_uses_ = 0;
    return false;
}

bool MultiFifo::Handle::push(Element e) {
    assert(e != kBottom);
    auto &mf = *fifo_;
    if (push_uses_ == 0) {
        refresh_push_queue();
    }
    for (;;) {
        auto &q = mf.queues_[push_queue_];
        if (!q.try_lock()) {
            refresh_push_queue();
            continue;
        }
        if (q.size > mf.mask_) {
            q.unlock();
            return push_scan(e);
        }
        mf.append_locked(q, e, log_);
        q.unlock();
        --push_uses_;
        return true;
    }
}

std::optional<Element> MultiFifo::Handle::try_pop() {
    auto &mf = *fifo_;
    if (pop_uses_ == 0) {
        refresh_pop_pair();
    }
    std::size_t empty_rounds = 0;
    for (;;) {
        auto const stamp_a = mf.head_stamp(pop_pair_[0]);
        auto const stamp_b = mf.head_stamp(pop_pair_[1]);
        if (stamp_a == kEmptyStamp && stamp_b == kEmptyStamp) {
            if (empty_rounds++ < mf.empty_retries_) {
                refresh_pop_pair();
                continue;
            }
            std::size_t found = mf.num_queues_;
            for (std::size_t i = 0; i < mf.num_queues_; ++i) {
                if (mf.head_stamp(i) != kEmptyStamp) {
                    found = i;
                    break;
                }
            }
            if (found == mf.num_queues_) {
                pop_uses_ = 0;
                if (log_ != nullptr) {
                    log_->record(OpKind::pop, kBottom);
                }
                return std::nullopt;
            }
            refresh_pop_pair();
            pop_pair_[pop_pair_[1] == found ? 1 : 0] = found;
            empty_rounds = 0;
            continue;
        }

        auto const pick = stamp_a <= stamp_b ? 0 : 1;
        auto const idx = pop_pair_[pick];
        auto const stamp = pick == 0 ? stamp_a : stamp_b;
        auto &q = mf.queues_[idx];
        if (!q.try_lock()) {
            refresh_pop_pair();
            continue;
        }
        if (q.size == 0 || q.buffer[q.head].stamp != stamp) {
            q.unlock();
            refresh_pop_pair();
            continue;
        }
        if (mf.hook_ != nullptr) [[unlikely]] {
            mf.hook_->on(HookPoint::pop_validated, static_cast<std::int64_t>(idx),
                         static_cast<std::int64_t>(pop_pair_[1 - pick]));
        }
        auto const value = q.buffer[q.head].value;
        q.head = (q.head + 1) & mf.mask_;
        --q.size;
        q.head_stamp.store(q.size == 0 ? kEmptyStamp : q.buffer[q.head].stamp, std::memory_order_release);
        if (log_ != nullptr) {
            log_->record(OpKind::pop, value);
        }
        q.unlock();
        --pop_uses_;
        return value;
    }
}

}  // namespace rfifo
