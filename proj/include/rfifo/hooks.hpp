#pragma once

#include <cstdint>

namespace rfifo {

/// Interleaving points at which a test can pause, yield, or run other
/// operations from inside a queue operation.
enum class HookPoint : std::uint8_t {
    before_header_cas,  // a block header CAS is about to be attempted
    cell_written,       // element stored in its cell, header not yet committed
    before_window_cas,  // a push/pop window CAS is about to be attempted
    empty_scan_done,    // failed pop found the push window empty, window not yet re-read
    pop_validated,      // MultiFifo: head re-validated under the lock
};

/// Scheduler hook. Installed before threads start; never changed while
/// operations are in flight.
class Hook {
   public:
    virtual ~Hook() = default;
    /// BlockFifo points pass a block index in `a` (`b` unused). pop_validated
    /// passes the chosen sub-queue in `a` and the other sampled one in `b`.
    virtual void on(HookPoint point, std::int64_t a, std::int64_t b) = 0;
};

}  // namespace rfifo
