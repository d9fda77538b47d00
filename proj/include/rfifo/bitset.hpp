#pragma once

#include "rfifo/detail/aligned_buffer.hpp"
#include "rfifo/element.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace rfifo {

/// Occupancy hints for the blocks of a BlockFifo ring.
///
/// One bit per block ("may contain elements"), 32 bits per atomic unit, each
/// unit bundled with a 32-bit epoch in a single 64-bit word and placed on its
/// own cache line. Errors are one-sided: a set bit may be stale, but a block
/// holding committed elements in the unit's epoch has its bit set.
class Bitset {
   public:
    static constexpr std::size_t kUnitBits = 32;

    struct UnitState {
        std::uint32_t bits;
        std::uint32_t epoch;
        friend bool operator==(UnitState const &, UnitState const &) = default;
    };

    /// `num_blocks` must be a multiple of kUnitBits.
    explicit Bitset(std::size_t num_blocks);

    /// Sets the bit of `pos`. A unit carrying an older epoch is reset first;
    /// a unit already in a newer epoch is left untouched.
    void set(std::size_t pos, std::uint32_t epoch) noexcept;

    /// Clears the bit of `pos` iff the unit is in `epoch`.
    void clear(std::size_t pos, std::uint32_t epoch) noexcept;

    /// First set bit in the window [start, start + w) of block indices,
    /// probing offsets start_offset, ..., w-1, 0, ..., start_offset-1.
    /// Units whose epoch differs from the epoch of the probed indices count as
    /// empty. Returns the block index (not the position).
    [[nodiscard]] std::optional<std::int64_t> find_set(std::int64_t start, std::size_t w,
                                                       std::size_t start_offset) const noexcept;

    [[nodiscard]] UnitState unit(std::size_t u) const noexcept;
    [[nodiscard]] bool test(std::size_t pos, std::uint32_t epoch) const noexcept;

    [[nodiscard]] std::size_t num_blocks() const noexcept {
        return num_blocks_;
    }
    [[nodiscard]] std::size_t num_units() const noexcept {
        return units_.size();
    }

   private:
    struct alignas(kCacheLine) Unit {
        std::atomic<std::uint64_t> word{0};
    };

    static constexpr std::uint64_t pack(std::uint32_t bits, std::uint32_t epoch) noexcept {
        return (std::uint64_t{epoch} << 32) | bits;
    }

    // Lowest set bit of unit `u` among positions [lo, lo + len) within the
    // unit, or -1.
    [[nodiscard]] int probe_unit(std::size_t u, unsigned lo, unsigned len, std::uint32_t epoch) const noexcept;

    std::size_t num_blocks_;
    detail::AlignedBuffer<Unit> units_;
};

}  // namespace rfifo
