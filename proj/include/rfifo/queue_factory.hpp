#pragma once

#include "rfifo/block_fifo.hpp"
#include "rfifo/multi_fifo.hpp"
#include "rfifo/strict_queue.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace rfifo {

enum class QueueKind { bf, mf, strict };

QueueKind parse_queue_kind(std::string_view name);
std::string_view to_string(QueueKind kind) noexcept;

/// Queue choice plus its parameters. Thread count, capacity and seed are
/// filled in by sized_for(); a ring factor or sub-queue capacity of 0 means
/// "derive from the capacity".
struct QueueSpec {
    QueueKind kind = QueueKind::bf;
    BlockFifoParams bf{};
    MultiFifoParams mf{};
    std::size_t strict_capacity = 0;
};

QueueSpec sized_for(QueueSpec spec, std::size_t threads, std::size_t capacity, std::uint64_t seed);

/// Parameter summary such as `B=1;C=63;k=4;bitset=1`.
std::string describe(QueueSpec const &spec);

/// Builds the queue described by `spec` and invokes f(queue).
template <typename F>
decltype(auto) with_queue(QueueSpec const &spec, F &&f) {
    switch (spec.kind) {
        case QueueKind::bf: {
            auto q = std::make_unique<BlockFifo>(spec.bf);
            return f(*q);
        }
        case QueueKind::mf: {
            auto q = std::make_unique<MultiFifo>(spec.mf);
            return f(*q);
        }
        case QueueKind::strict:
        default: {
            auto q = std::make_unique<StrictQueue>(spec.strict_capacity);
            return f(*q);
        }
    }
}

}  // namespace rfifo
