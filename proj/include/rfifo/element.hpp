#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

namespace rfifo {

/// Payload word stored by every queue in this library.
using Element = std::uint64_t;

/// Reserved "empty cell / failed pop" value. Never accepted by push.
inline constexpr Element kBottom = ~Element{0};

inline constexpr std::size_t kCacheLine = 64;

using Rng = std::mt19937_64;

/// Per-thread generator derived from a root seed. Distinct streams for
/// distinct thread ids, reproducible for a fixed (seed, thread id).
inline Rng make_rng(std::uint64_t seed, std::uint64_t thread_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(thread_id), static_cast<std::uint32_t>(thread_id >> 32),
                      0x9e3779b9u};
    return Rng{seq};
}

/// Uniform index in [0, n) by multiply-high (Lemire's fastrange).
inline std::size_t random_index(Rng &rng, std::size_t n) noexcept {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

class OpLog;

/// Contract shared by every queue: per-thread handles with push/try_pop.
template <typename Q>
concept ConcurrentQueue = requires(Q &q, typename Q::Handle &h, Element e, OpLog *log) {
    { q.get_handle(std::size_t{0}) } -> std::same_as<typename Q::Handle>;
    { h.push(e) } -> std::same_as<bool>;
    { h.try_pop() } -> std::same_as<std::optional<Element>>;
    h.attach_log(log);
    { q.capacity() } -> std::convertible_to<std::size_t>;
};

}  // namespace rfifo
