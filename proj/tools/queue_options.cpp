#include "queue_options.hpp"

namespace rfifo::cli {

void QueueOptions::add_to(CLI::App &app) {
    spec.bf.ring_factor = 0;
    app.add_option("--queue", kind, "Queue implementation")
        ->required()
        ->check(CLI::IsMember({"bf", "mf", "strict"}));
    app.add_flag("--no-bitset", no_bitset, "Disable the BlockFIFO filled-block hints");
    app.add_option("--bf-block-factor", spec.bf.block_factor, "BlockFIFO blocks per window per thread (B)")
        ->check(CLI::PositiveNumber);
    app.add_option("--bf-block-size", spec.bf.block_size, "BlockFIFO cells per block (C)")
        ->check(CLI::Range(1, 65534));
    app.add_option("--bf-ring-factor", spec.bf.ring_factor, "BlockFIFO windows in the ring (k >= 3, 0 = auto)");
    app.add_option("--mf-queue-factor", spec.mf.queue_factor, "MultiFIFO sub-queues per thread (c >= 2)");
    app.add_option("--mf-stickiness", spec.mf.stickiness, "MultiFIFO operations per random choice (s >= 1)")
        ->check(CLI::PositiveNumber);
}

QueueSpec QueueOptions::finish() {
    spec.kind = parse_queue_kind(kind);
    spec.bf.use_bitset = !no_bitset;
    return spec;
}

}  // namespace rfifo::cli
