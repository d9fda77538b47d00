#include "rfifo/queue_factory.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace rfifo {

QueueKind parse_queue_kind(std::string_view name) {
    if (name == "bf") {
        return QueueKind::bf;
    }
    if (name == "mf") {
        return QueueKind::mf;
    }
    if (name == "strict") {
        return QueueKind::strict;
    }
    throw std::invalid_argument("unknown queue kind '" + std::string(name) + "' (expected bf, mf or strict)");
}

std::string_view to_string(QueueKind kind) noexcept {
    switch (kind) {
        case QueueKind::bf:
            return "bf";
        case QueueKind::mf:
            return "mf";
        case QueueKind::strict:
            return "strict";
    }
    return "?";
}

QueueSpec sized_for(QueueSpec spec, std::size_t threads, std::size_t capacity, std::uint64_t seed) {
    spec.bf.threads = threads;
    spec.bf.seed = seed;
    if (spec.bf.ring_factor == 0) {
        spec.bf.ring_factor =
            BlockFifo::ring_factor_for(capacity, threads, spec.bf.block_factor, spec.bf.block_size);
    }
    spec.mf.threads = threads;
    spec.mf.seed = seed;
    if (spec.mf.queue_capacity == 0) {
        auto const per_queue = (capacity + spec.mf.queue_factor * threads - 1) / (spec.mf.queue_factor * threads);
        spec.mf.queue_capacity = std::bit_ceil(std::max<std::size_t>(per_queue, 16));
    }
    if (spec.strict_capacity == 0) {
        spec.strict_capacity = std::max<std::size_t>(capacity, 1);
    }
    return spec;
}

std::string describe(QueueSpec const &spec) {
    std::ostringstream out;
    switch (spec.kind) {
        case QueueKind::bf:
            out << "B=" << spec.bf.block_factor << ";C=" << spec.bf.block_size << ";k=" << spec.bf.ring_factor
                << ";bitset=" << (spec.bf.use_bitset ? 1 : 0);
            break;
        case QueueKind::mf:
            out << "c=" << spec.mf.queue_factor << ";s=" << spec.mf.stickiness << ";m=" << spec.mf.queue_capacity;
            break;
        case QueueKind::strict:
            out << "capacity=" << spec.strict_capacity;
            break;
    }
    return out.str();
}

}  // namespace rfifo
