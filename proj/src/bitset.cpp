#include "rfifo/bitset.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

namespace rfifo {

Bitset::Bitset(std::size_t num_blocks) : num_blocks_(num_blocks), units_(num_blocks / kUnitBits) {
    if (num_blocks == 0 || num_blocks % kUnitBits != 0) {
        throw std::invalid_argument("Bitset: block count must be a positive multiple of 32");
    }
}

void Bitset::set(std::size_t pos, std::uint32_t epoch) noexcept {
    auto &word = units_[pos / kUnitBits].word;
    auto const bit = std::uint32_t{1} << (pos % kUnitBits);
    auto old = word.load(std::memory_order_acquire);
    for (;;) {
        auto const unit_epoch = static_cast<std::uint32_t>(old >> 32);
        std::uint64_t next;
        if (unit_epoch == epoch) {
            next = old | bit;
        } else if (static_cast<std::int32_t>(epoch - unit_epoch) > 0) {
            next = pack(bit, epoch);
        } else {
            return;
        }
        if (next == old || word.compare_exchange_weak(old, next, std::memory_order_acq_rel)) {
            return;
        }
    }
}

void Bitset::clear(std::size_t pos, std::uint32_t epoch) noexcept {
    auto &word = units_[pos / kUnitBits].word;
    auto const bit = std::uint64_t{1} << (pos % kUnitBits);
    auto old = word.load(std::memory_order_acquire);
    for (;;) {
        if (static_cast<std::uint32_t>(old >> 32) != epoch || (old & bit) == 0) {
            return;
        }
        if (word.compare_exchange_weak(old, old & ~bit, std::memory_order_acq_rel)) {
            return;
        }
    }
}

int Bitset::probe_unit(std::size_t u, unsigned lo, unsigned len, std::uint32_t epoch) const noexcept {
    auto const word = units_[u].word.load(std::memory_order_acquire);
    if (static_cast<std::uint32_t>(word >> 32) != epoch) {
        return -1;
    }
    // Rotate the probe start down to bit 0, then count zeros up to the first hit.
    auto const rotated = std::rotr(static_cast<std::uint32_t>(word), static_cast<int>(lo));
    auto const mask = len >= kUnitBits ? ~std::uint32_t{0} : (std::uint32_t{1} << len) - 1;
    auto const hits = rotated & mask;
    return hits == 0 ? -1 : static_cast<int>(lo) + std::countr_zero(hits);
}

std::optional<std::int64_t> Bitset::find_set(std::int64_t start, std::size_t w,
                                             std::size_t start_offset) const noexcept {
    assert(start >= 0 && start_offset < w);
    auto const n = static_cast<std::uint64_t>(num_blocks_);
    auto scan = [&](std::size_t from, std::size_t to) -> std::optional<std::int64_t> {
        while (from < to) {
            auto const index = static_cast<std::uint64_t>(start) + from;
            auto const pos = index % n;
            auto const lo = static_cast<unsigned>(pos % kUnitBits);
            auto const len = static_cast<unsigned>(std::min<std::size_t>(to - from, kUnitBits - lo));
            auto const epoch = static_cast<std::uint32_t>(index / n);
            if (int bit = probe_unit(pos / kUnitBits, lo, len, epoch); bit >= 0) {
                return static_cast<std::int64_t>(index + static_cast<unsigned>(bit) - lo);
            }
            from += len;
        }
        return std::nullopt;
    };
    if (auto hit = scan(start_offset, w)) {
        return hit;
    }
    return scan(0, start_offset);
}

Bitset::UnitState Bitset::unit(std::size_t u) const noexcept {
    auto const word = units_[u].word.load(std::memory_order_acquire);
    return {static_cast<std::uint32_t>(word), static_cast<std::uint32_t>(word >> 32)};
}

bool Bitset::test(std::size_t pos, std::uint32_t epoch) const noexcept {
    auto const s = unit(pos / kUnitBits);
    return s.epoch == epoch && ((s.bits >> (pos % kUnitBits)) & 1U) != 0;
}

}  // namespace rfifo
