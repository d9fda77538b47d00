#pragma once

#include "rfifo/bitset.hpp"
#include "rfifo/detail/aligned_buffer.hpp"
#include "rfifo/element.hpp"
#include "rfifo/hooks.hpp"
#include "rfifo/op_log.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace rfifo {

struct BlockFifoParams {
    std::size_t threads = 1;       // p, maximum number of concurrent handles
    std::size_t block_factor = 1;  // B, blocks per window per thread
    std::size_t block_size = 63;   // C, cells per block
    std::size_t ring_factor = 4;   // k, ring holds k windows (k >= 3)
    bool use_bitset = true;
    std::uint64_t seed = 1;
};

/// Packed block header: epoch (31 bits) | pop counter (16) | push counter (16) | claimed (1).
struct BlockHeader {
    static constexpr std::uint32_t kEpochMask = 0x7fffffffU;

    std::uint32_t epoch = 0;
    std::uint16_t pop = 0;
    std::uint16_t push = 0;
    bool claimed = false;

    [[nodiscard]] constexpr std::uint64_t pack() const noexcept {
        return (std::uint64_t{epoch & kEpochMask} << 33) | (std::uint64_t{pop} << 17) | (std::uint64_t{push} << 1) |
               std::uint64_t{claimed};
    }

    static constexpr BlockHeader unpack(std::uint64_t word) noexcept {
        return BlockHeader{static_cast<std::uint32_t>(word >> 33), static_cast<std::uint16_t>(word >> 17),
                           static_cast<std::uint16_t>(word >> 1), (word & 1U) != 0};
    }

    friend constexpr bool operator==(BlockHeader const &, BlockHeader const &) = default;
};

/// Bounded lock-free relaxed FIFO over a ring of fixed-size blocks.
///
/// The ring holds k * w blocks of C cells, w = B * p rounded up to a multiple
/// of 32. A block index i addresses position i mod |A| in epoch i / |A|; the
/// push and pop windows are block indices of their first block. Threads claim
/// whole blocks in the push window and fill them privately; pops reserve
/// elements through the pop counter and close a block by bumping its epoch.
/// Failed pops are linearizable.
class BlockFifo {
   public:
    class Handle {
        friend BlockFifo;

        BlockFifo *fifo_;
        Rng rng_;
        std::int64_t push_block_ = -1;
        std::int64_t pop_block_ = -1;
        OpLog *log_ = nullptr;

        Handle(BlockFifo &fifo, Rng rng) noexcept : fifo_(&fifo), rng_(rng) {
        }

        std::optional<Element> pop_from_hints(std::int64_t window, std::size_t offset);
        Element take(std::int64_t index, std::uint16_t slot, std::uint64_t stamp);

       public:
        Handle(Handle const &) = delete;
        Handle &operator=(Handle const &) = delete;
        Handle(Handle &&) noexcept = default;
        Handle &operator=(Handle &&) noexcept = default;

        /// False iff the queue is full. Requires e != kBottom.
        bool push(Element e);
        /// nullopt iff the queue was empty at some point during the call.
        std::optional<Element> try_pop();

        void attach_log(OpLog *log) noexcept {
            log_ = log;
        }
        [[nodiscard]] std::int64_t push_block() const noexcept {
            return push_block_;
        }
        [[nodiscard]] std::int64_t pop_block() const noexcept {
            return pop_block_;
        }
    };

    explicit BlockFifo(BlockFifoParams const &params);

    BlockFifo(BlockFifo const &) = delete;
    BlockFifo &operator=(BlockFifo const &) = delete;

    Handle get_handle(std::size_t thread_id);

    [[nodiscard]] std::size_t window_size() const noexcept {
        return window_;
    }
    [[nodiscard]] std::size_t num_blocks() const noexcept {
        return num_blocks_;
    }
    [[nodiscard]] std::size_t block_size() const noexcept {
        return block_size_;
    }
    [[nodiscard]] std::size_t capacity() const noexcept {
        return num_blocks_ * block_size_;
    }
    [[nodiscard]] bool uses_bitset() const noexcept {
        return use_bitset_;
    }
    [[nodiscard]] BlockFifoParams const &params() const noexcept {
        return params_;
    }

    [[nodiscard]] std::int64_t push_window() const noexcept {
        return push_window_.value.load(std::memory_order_acquire);
    }
    [[nodiscard]] std::int64_t pop_window() const noexcept {
        return pop_window_.value.load(std::memory_order_acquire);
    }
    [[nodiscard]] BlockHeader header(std::size_t pos) const noexcept {
        return BlockHeader::unpack(header_word(pos).load(std::memory_order_acquire));
    }
    [[nodiscard]] Element cell(std::size_t pos, std::size_t slot) const noexcept {
        return cell_word(pos, slot).load(std::memory_order_acquire);
    }
    [[nodiscard]] Bitset const &bitset() const noexcept {
        return bitset_;
    }

    [[nodiscard]] std::size_t position_of(std::int64_t index) const noexcept {
        return static_cast<std::size_t>(static_cast<std::uint64_t>(index) % num_blocks_);
    }
    [[nodiscard]] std::uint32_t epoch_of(std::int64_t index) const noexcept {
        return static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) / num_blocks_) & BlockHeader::kEpochMask;
    }

    /// Quiescent-state check: every block of the current epoch in
    /// [pop window, push window + w) that holds committed, unpopped elements
    /// has its hint bit set. Only meaningful with no operation in flight.
    [[nodiscard]] bool hints_cover_live_blocks() const noexcept;

    void set_hook(Hook *hook) noexcept {
        hook_ = hook;
    }

    /// Ring factor k such that `capacity` elements fit comfortably under a
    /// push-pop workload.
    static std::size_t ring_factor_for(std::size_t capacity, std::size_t threads, std::size_t block_factor,
                                       std::size_t block_size);
    static std::size_t window_for(std::size_t threads, std::size_t block_factor) noexcept;

    // Building blocks of push and pop, exposed for direct testing.

    /// Writes e into the cell at h.push, then commits by CAS-ing the header
    /// from h to h with push + 1. Rolls the cell back to kBottom if the commit
    /// fails. h must have been read from the block at `index`.
    bool insert_in_block(BlockHeader h, std::int64_t index, Element e, OpLog *log = nullptr);

    /// Advances the pop counter, or closes the block (epoch + 1, counters
    /// reset, unclaimed) when h holds at most one unreserved element.
    bool reserve_element(BlockHeader h, std::int64_t index);

    /// True iff every push-window header shows no pushed element and the push
    /// window still equals `push_window` after the scan.
    bool push_window_empty(std::int64_t push_window);

   private:
    struct alignas(kCacheLine) PaddedIndex {
        std::atomic<std::int64_t> value;
    };

    std::atomic<std::uint64_t> &header_word(std::size_t pos) const noexcept {
        return words_[pos * stride_];
    }
    std::atomic<std::uint64_t> &cell_word(std::size_t pos, std::size_t slot) const noexcept {
        return words_[pos * stride_ + 1 + slot];
    }
    std::atomic<std::uint64_t> &header_word_of(std::int64_t index) const noexcept {
        return header_word(position_of(index));
    }

    void hook(HookPoint point, std::int64_t arg) {
        if (hook_ != nullptr) [[unlikely]] {
            hook_->on(point, arg, 0);
        }
    }

    BlockFifoParams params_;
    std::size_t window_;
    std::size_t block_size_;
    std::size_t num_blocks_;
    std::size_t stride_;  // words per block, multiple of a cache line
    bool use_bitset_;
    Hook *hook_ = nullptr;

    mutable detail::AlignedBuffer<std::atomic<std::uint64_t>> words_;
    Bitset bitset_;
    PaddedIndex push_window_;
    PaddedIndex pop_window_;
};

static_assert(ConcurrentQueue<BlockFifo>);

}  // namespace rfifo
