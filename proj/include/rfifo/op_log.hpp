#pragma once

#include "rfifo/element.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rfifo {

enum class OpKind : std::uint8_t { push, pop };

/// One completed queue operation, ordered by a shared recording clock.
/// Failed pops are logged with value kBottom.
struct OpRecord {
    OpKind kind;
    std::uint64_t stamp;
    Element value;

    friend bool operator==(OpRecord const &, OpRecord const &) = default;
};

/// Append-only per-thread log. The clock is shared by all logs of a Recorder.
class alignas(kCacheLine) OpLog {
    std::atomic<std::uint64_t> *clock_;
    std::vector<OpRecord> records_;

   public:
    OpLog(std::atomic<std::uint64_t> &clock, std::size_t reserve) : clock_(&clock) {
        records_.reserve(reserve);
    }

    std::uint64_t take_stamp() noexcept {
        return clock_->fetch_add(1, std::memory_order_acq_rel);
    }

    void append(OpKind kind, std::uint64_t stamp, Element value) {
        records_.push_back(OpRecord{kind, stamp, value});
    }

    /// Stamp and append in one step, for operations whose completion point
    /// coincides with the call site.
    void record(OpKind kind, Element value) {
        append(kind, take_stamp(), value);
    }

    [[nodiscard]] std::vector<OpRecord> const &records() const noexcept {
        return records_;
    }
};

/// Owns the recording clock and one log per participant.
class Recorder {
    alignas(kCacheLine) std::atomic<std::uint64_t> clock_{0};
    std::vector<OpLog> logs_;

   public:
    Recorder(std::size_t num_logs, std::size_t reserve_per_log);

    Recorder(Recorder const &) = delete;
    Recorder &operator=(Recorder const &) = delete;

    OpLog &log(std::size_t i) noexcept {
        return logs_[i];
    }
    [[nodiscard]] std::size_t num_logs() const noexcept {
        return logs_.size();
    }

    /// k-way merge of all logs by stamp. Call only after recording threads joined.
    [[nodiscard]] std::vector<OpRecord> merged() const;
};

}  // namespace rfifo
