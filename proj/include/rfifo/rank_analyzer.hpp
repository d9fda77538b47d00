#pragma once

#include "rfifo/op_log.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rfifo {

/// Aggregated rank errors of all successful pops in a trace.
///
/// histogram[0] counts pops with rank error 0; histogram[k] for k >= 1 counts
/// rank errors in [2^(k-1), 2^k).
struct RankReport {
    std::uint64_t count = 0;
    double mean = 0.0;
    std::uint64_t max = 0;
    std::vector<std::uint64_t> histogram;

    /// Upper bound of the histogram bucket holding the q-quantile (q in [0,1]).
    [[nodiscard]] std::uint64_t percentile(double q) const;

    friend bool operator==(RankReport const &, RankReport const &) = default;
};

/// Bucket index for a rank error value.
std::size_t rank_bucket(std::uint64_t error) noexcept;

/// Replays a stamp-sorted trace through a sequential queue ordered by push
/// stamp. The rank error of a pop is the number of live elements pushed before
/// the popped one. O(n log n).
///
/// Throws std::invalid_argument if the trace is not sorted by stamp, if a pop
/// has no matching live push, or if a value is pushed while an equal value is
/// still live.
RankReport replay(std::span<OpRecord const> records);

/// Comma-separated `count,mean,max,p50,p99,p999`.
std::string to_csv(RankReport const &report);
inline constexpr char const *kRankCsvHeader = "count,mean,max,p50,p99,p999";

}  // namespace rfifo
