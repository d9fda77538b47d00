#include "rfifo/block_fifo.hpp"

#include <cassert>
#include <limits>
#include <stdexcept>

namespace rfifo {

namespace {

constexpr std::size_t kWordsPerLine = kCacheLine / sizeof(std::uint64_t);

std::uint32_t hint_epoch(std::int64_t index, std::size_t num_blocks) noexcept {
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) / num_blocks);
}

// Bounded number of hint hits followed per pop before falling back to headers.
constexpr int kMaxHintProbes = 4;

}  // namespace

std::size_t BlockFifo::window_for(std::size_t threads, std::size_t block_factor) noexcept {
    auto const raw = threads * block_factor;
    return (raw + Bitset::kUnitBits - 1) / Bitset::kUnitBits * Bitset::kUnitBits;
}

std::size_t BlockFifo::ring_factor_for(std::size_t capacity, std::size_t threads, std::size_t block_factor,
                                       std::size_t block_size) {
    auto const window_cells = window_for(threads, block_factor) * block_size;
    auto const windows = (capacity + window_cells - 1) / window_cells;
    return std::max<std::size_t>(4, 2 * windows + 3);
}

BlockFifo::BlockFifo(BlockFifoParams const &params)
    : params_(params),
      window_(window_for(params.threads, params.block_factor)),
      block_size_(params.block_size),
      num_blocks_(params.ring_factor * window_),
      stride_((1 + params.block_size + kWordsPerLine - 1) / kWordsPerLine * kWordsPerLine),
      use_bitset_(params.use_bitset),
      words_(num_blocks_ * stride_),
      bitset_(num_blocks_) {
    if (params.threads == 0 || params.block_factor == 0) {
        throw std::invalid_argument("BlockFifo: threads and block factor must be positive");
    }
    if (params.block_size == 0 || params.block_size > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument("BlockFifo: block size must be in [1, 65535]");
    }
    if (params.ring_factor < 3) {
        throw std::invalid_argument("BlockFifo: ring factor must be at least 3");
    }
    for (std::size_t pos = 0; pos < num_blocks_; ++pos) {
        header_word(pos).store(BlockHeader{}.pack(), std::memory_order_relaxed);
        for (std::size_t j = 0; j < block_size_; ++j) {
            cell_word(pos, j).store(kBottom, std::memory_order_relaxed);
        }
    }
    // Pop window directly behind the push window.
    pop_window_.value.store(0, std::memory_order_relaxed);
    push_window_.value.store(static_cast<std::int64_t>(window_), std::memory_order_release);
}

BlockFifo::Handle BlockFifo::get_handle(std::size_t thread_id) {
    return Handle{*this, make_rng(params_.seed, thread_id)};
}

bool BlockFifo::insert_in_block(BlockHeader h, std::int64_t index, Element e, OpLog *log) {
    assert(e != kBottom);
    if (h.push >= block_size_) {
        return false;
    }
    auto const pos = position_of(index);
    auto &cell = cell_word(pos, h.push);
    Element expected = kBottom;
    if (!cell.compare_exchange_strong(expected, e, std::memory_order_acq_rel, std::memory_order_relaxed)) {
        return false;
    }
    hook(HookPoint::cell_written, index);

    auto committed = h;
    committed.push = static_cast<std::uint16_t>(h.push + 1);
    committed.claimed = true;
    auto old_word = h.pack();
    // Stamped before the commit so that any pop of e is stamped after it.
    auto const stamp = log != nullptr ? log->take_stamp() : 0;
    hook(HookPoint::before_header_cas, index);
    if (header_word(pos).compare_exchange_strong(old_word, committed.pack(), std::memory_order_acq_rel,
                                                 std::memory_order_relaxed)) {
        if (log != nullptr) {
            log->append(OpKind::push, stamp, e);
        }
        return true;
    }
    cell.store(kBottom, std::memory_order_release);
    return false;
}

bool BlockFifo::reserve_element(BlockHeader h, std::int64_t index) {
    BlockHeader next;
    bool const closing = h.pop + 1 >= h.push;
    if (!closing) {
        next = BlockHeader{h.epoch, static_cast<std::uint16_t>(h.pop + 1), h.push, true};
    } else {
        next = BlockHeader{(h.epoch + 1) & BlockHeader::kEpochMask, 0, 0, false};
    }
    auto old_word = h.pack();
    hook(HookPoint::before_header_cas, index);
    if (!header_word_of(index).compare_exchange_strong(old_word, next.pack(), std::memory_order_acq_rel,
                                                       std::memory_order_relaxed)) {
        return false;
    }
    if (closing && use_bitset_) {
        bitset_.clear(position_of(index), hint_epoch(index, num_blocks_));
    }
    return true;
}

bool BlockFifo::push_window_empty(std::int64_t push_window) {
    for (std::size_t j = 0; j < window_; ++j) {
        auto const h = BlockHeader::unpack(
            header_word_of(push_window + static_cast<std::int64_t>(j)).load(std::memory_order_acquire));
        if (h.push > 0) {
            return false;
        }
    }
    hook(HookPoint::empty_scan_done, push_window);
    return push_window == push_window_.value.load(std::memory_order_acquire);
}

bool BlockFifo::hints_cover_live_blocks() const noexcept {
    auto const first = pop_window();
    auto const last = push_window() + static_cast<std::int64_t>(window_);
    for (auto i = first; i < last; ++i) {
        auto const h = header(position_of(i));
        if (h.epoch == epoch_of(i) && h.push > h.pop &&
            !bitset_.test(position_of(i), hint_epoch(i, num_blocks_))) {
            return false;
        }
    }
    return true;
}

bool BlockFifo::Handle::push(Element e) {
    auto &q = *fifo_;
    auto const w = static_cast<std::int64_t>(q.window_);
    auto p = q.push_window_.value.load(std::memory_order_acquire);

    if (push_block_ >= p) {
        auto const h = BlockHeader::unpack(q.header_word_of(push_block_).load(std::memory_order_acquire));
        if (h.epoch == q.epoch_of(push_block_) && q.insert_in_block(h, push_block_, e, log_)) {
            if (h.push + 1U >= q.block_size_) {
                push_block_ = -1;
            }
            return true;
        }
    }

    for (;;) {
        auto const r = static_cast<std::int64_t>(random_index(rng_, q.window_));
        for (std::int64_t j = 0; j < w; ++j) {
            auto const i = p + (r + j) % w;
            auto &header = q.header_word_of(i);
            auto const unclaimed = BlockHeader{q.epoch_of(i), 0, 0, false};
            auto expected = unclaimed.pack();
            if (header.load(std::memory_order_acquire) != expected) {
                continue;
            }
            auto const claimed = BlockHeader{q.epoch_of(i), 0, 0, true};
            q.hook(HookPoint::before_header_cas, i);
            if (!header.compare_exchange_strong(expected, claimed.pack(), std::memory_order_acq_rel,
                                                std::memory_order_relaxed)) {
                continue;
            }
            if (q.use_bitset_) {
                q.bitset_.set(q.position_of(i), hint_epoch(i, q.num_blocks_));
            }
            if (q.insert_in_block(claimed, i, e, log_)) {
                push_block_ = q.block_size_ > 1 ? i : -1;
                return true;
            }
        }
        if (p + w - q.pop_window_.value.load(std::memory_order_acquire) >= static_cast<std::int64_t>(q.num_blocks_)) {
            push_block_ = -1;
            return false;
        }
        q.hook(HookPoint::before_window_cas, p);
        if (q.push_window_.value.compare_exchange_strong(p, p + w, std::memory_order_acq_rel,
                                                         std::memory_order_acquire)) {
            p += w;
        }
    }
}

Element BlockFifo::Handle::take(std::int64_t index, std::uint16_t slot, std::uint64_t stamp) {
    auto &q = *fifo_;
    auto const e = q.cell_word(q.position_of(index), slot).exchange(kBottom, std::memory_order_acq_rel);
    assert(e != kBottom);
    if (log_ != nullptr) {
        log_->append(OpKind::pop, stamp, e);
    }
    return e;
}

std::optional<Element> BlockFifo::Handle::pop_from_hints(std::int64_t window, std::size_t offset) {
    auto &q = *fifo_;
    for (int probe = 0; probe < kMaxHintProbes; ++probe) {
        auto const hit = q.bitset_.find_set(window, q.window_, offset);
        if (!hit) {
            return std::nullopt;
        }
        auto const i = *hit;
        for (;;) {
            auto const h = BlockHeader::unpack(q.header_word_of(i).load(std::memory_order_acquire));
            if (h.epoch != q.epoch_of(i)) {
                // Closed since the hint was set; drop the stale bit.
                q.bitset_.clear(q.position_of(i), hint_epoch(i, q.num_blocks_));
                break;
            }
            if (h.push == 0) {
                break;  // claimed, nothing committed yet
            }
            if (q.reserve_element(h, i)) {
                auto const stamp = log_ != nullptr ? log_->take_stamp() : 0;
                pop_block_ = i;
                return take(i, h.pop, stamp);
            }
        }
        offset = static_cast<std::size_t>(i - window + 1) % q.window_;
    }
    return std::nullopt;
}

std::optional<Element> BlockFifo::Handle::try_pop() {
    auto &q = *fifo_;
    auto const w = static_cast<std::int64_t>(q.window_);

    if (pop_block_ != -1) {
        auto const h = BlockHeader::unpack(q.header_word_of(pop_block_).load(std::memory_order_acquire));
        if (h.epoch == q.epoch_of(pop_block_) && h.push > 0 && q.reserve_element(h, pop_block_)) {
            auto const stamp = log_ != nullptr ? log_->take_stamp() : 0;
            return take(pop_block_, h.pop, stamp);
        }
    }

    for (;;) {
        auto p = q.pop_window_.value.load(std::memory_order_acquire);
        auto const qw = q.push_window_.value.load(std::memory_order_acquire);
        if (p + w < qw &&
            BlockHeader::unpack(q.header_word_of(p).load(std::memory_order_acquire)).epoch != q.epoch_of(p)) {
            // First block of the pop window is closed.
            q.hook(HookPoint::before_window_cas, p);
            q.pop_window_.value.compare_exchange_strong(p, p + 1, std::memory_order_acq_rel);
            continue;
        }

        auto const r = static_cast<std::int64_t>(random_index(rng_, q.window_));
        if (q.use_bitset_) {
            if (auto e = pop_from_hints(p, static_cast<std::size_t>(r))) {
                return e;
            }
        }

        // Prefer blocks nobody has popped from yet.
        for (std::int64_t j = 0; j < w; ++j) {
            auto const i = p + (r + j) % w;
            auto const h = BlockHeader::unpack(q.header_word_of(i).load(std::memory_order_acquire));
            if (h.epoch == q.epoch_of(i) && h.pop == 0 && h.push > 0 && q.reserve_element(h, i)) {
                auto const stamp = log_ != nullptr ? log_->take_stamp() : 0;
                pop_block_ = i;
                return take(i, h.pop, stamp);
            }
        }

        // Any block that is not closed; closes empty ones on the way.
        for (std::int64_t j = 0; j < w; ++j) {
            auto const i = p + (r + j) % w;
            for (;;) {
                auto const h = BlockHeader::unpack(q.header_word_of(i).load(std::memory_order_acquire));
                if (h.epoch != q.epoch_of(i)) {
                    break;
                }
                if (q.reserve_element(h, i) && h.push > 0) {
                    auto const stamp = log_ != nullptr ? log_->take_stamp() : 0;
                    pop_block_ = i;
                    return take(i, h.pop, stamp);
                }
            }
        }

        if (p + w == qw) {
            if (q.push_window_empty(qw)) {
                if (log_ != nullptr) {
                    log_->record(OpKind::pop, kBottom);
                }
                return std::nullopt;
            }
            auto expected_push = qw;
            q.hook(HookPoint::before_window_cas, qw);
            q.push_window_.value.compare_exchange_strong(expected_push, qw + w, std::memory_order_acq_rel);
            q.hook(HookPoint::before_window_cas, p);
            q.pop_window_.value.compare_exchange_strong(p, p + w, std::memory_order_acq_rel);
        }
    }
}

}  // namespace rfifo
