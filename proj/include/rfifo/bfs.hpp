#pragma once

#include "rfifo/element.hpp"
#include "rfifo/graph.hpp"
#include "rfifo/queue_factory.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rfifo {

/// Largest distance a search element may carry. Keeps every packed element
/// distinct from kBottom.
inline constexpr std::uint32_t kMaxDistance = (std::uint32_t{1} << 24) - 2;
inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::size_t kMaxSources = 256;

/// Queue payload: distance (24 bits) | source index (8) | node (32).
struct SearchElement {
    std::uint32_t distance = 0;
    std::uint32_t source = 0;
    NodeId node = 0;

    [[nodiscard]] constexpr Element pack() const noexcept {
        return (Element{distance} << 40) | (Element{source & 0xffU} << 32) | Element{node};
    }
    static constexpr SearchElement unpack(Element e) noexcept {
        return SearchElement{static_cast<std::uint32_t>(e >> 40), static_cast<std::uint32_t>((e >> 32) & 0xffU),
                             static_cast<NodeId>(e)};
    }
    friend constexpr bool operator==(SearchElement const &, SearchElement const &) = default;
};

/// One row of shared distances per source; entries only decrease.
class DistanceTable {
   public:
    DistanceTable(std::size_t sources, std::uint64_t n);

    [[nodiscard]] std::uint32_t get(std::size_t source, NodeId v) const noexcept {
        return cells_[source * n_ + v].load(std::memory_order_acquire);
    }
    /// Lowers the entry to d. True iff this call decreased it.
    bool relax(std::size_t source, NodeId v, std::uint32_t d) noexcept {
        auto &cell = cells_[source * n_ + v];
        auto cur = cell.load(std::memory_order_relaxed);
        while (d < cur) {
            if (cell.compare_exchange_weak(cur, d, std::memory_order_acq_rel, std::memory_order_relaxed)) {
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] std::size_t sources() const noexcept {
        return sources_;
    }
    [[nodiscard]] std::uint64_t n() const noexcept {
        return n_;
    }
    [[nodiscard]] std::vector<std::uint32_t> flatten() const;

   private:
    std::size_t sources_;
    std::uint64_t n_;
    std::unique_ptr<std::atomic<std::uint32_t>[]> cells_;
};

/// Counts created and finished work items per worker. The search is over
/// once a consistent snapshot shows every created item finished: items are
/// only created while another one is being processed, so nothing can appear
/// afterwards. Slot `workers` is reserved for the seeding thread.
class TerminationDetector {
   public:
    explicit TerminationDetector(std::size_t workers);

    void created(std::size_t slot, std::uint64_t count = 1) noexcept {
        slots_[slot].created.fetch_add(count, std::memory_order_seq_cst);
    }
    void finished(std::size_t slot, std::uint64_t count = 1) noexcept {
        slots_[slot].finished.fetch_add(count, std::memory_order_seq_cst);
    }

    /// Two identical collects of all counters form a consistent snapshot
    /// because the counters never decrease.
    [[nodiscard]] bool quiescent() const noexcept;

    [[nodiscard]] std::size_t seed_slot() const noexcept {
        return num_slots_ - 1;
    }

   private:
    struct alignas(kCacheLine) Slot {
        std::atomic<std::uint64_t> created{0};
        std::atomic<std::uint64_t> finished{0};
    };

    std::uint64_t collect(std::vector<std::uint64_t> &out) const noexcept;

    std::size_t num_slots_;
    std::unique_ptr<Slot[]> slots_;
};

struct BfsResult {
    std::size_t sources = 0;
    std::uint64_t n = 0;
    std::vector<std::uint32_t> distances;  // sources x n, row-major
    std::uint64_t processed = 0;           // pops whose distance was current
    std::uint64_t stale_pops = 0;          // pops superseded by a shorter distance
    std::uint64_t overflow_pushes = 0;     // pushes the queue refused
    double seconds = 0.0;

    [[nodiscard]] std::span<std::uint32_t const> row(std::size_t source) const noexcept {
        return {distances.data() + source * n, static_cast<std::size_t>(n)};
    }
};

/// Exact reference: one textbook BFS per source.
BfsResult sequential_bfs(Graph const &g, std::span<NodeId const> sources);

/// Sum of distance + 1 over all reached (source, node) pairs.
std::uint64_t checksum(BfsResult const &result) noexcept;

/// s distinct nodes drawn uniformly. Throws if s is 0, above the source cap or
/// above n.
std::vector<NodeId> choose_sources(Graph const &g, std::size_t s, std::uint64_t seed);

void check_bfs_inputs(Graph const &g, std::span<NodeId const> sources);

/// Relaxed BFS driven by `queue`, which must accept at least `threads`
/// handles. Throws std::runtime_error if a distance would exceed kMaxDistance.
template <ConcurrentQueue Q>
BfsResult parallel_bfs(Q &queue, Graph const &g, std::span<NodeId const> sources, std::size_t threads) {
    check_bfs_inputs(g, sources);
    if (threads == 0) {
        throw std::invalid_argument("parallel_bfs: threads must be positive");
    }

    DistanceTable dist(sources.size(), g.n);
    TerminationDetector detector(threads);
    std::vector<typename Q::Handle> handles;
    handles.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        handles.push_back(queue.get_handle(t));
    }
    for (std::size_t si = 0; si < sources.size(); ++si) {
        dist.relax(si, sources[si], 0);
        detector.created(detector.seed_slot());
        if (!handles[0].push(SearchElement{0, static_cast<std::uint32_t>(si), sources[si]}.pack())) {
            throw std::runtime_error("parallel_bfs: queue too small for the sources");
        }
    }

    struct alignas(kCacheLine) Stats {
        std::uint64_t processed = 0;
        std::uint64_t stale = 0;
        std::uint64_t overflow = 0;
    };
    std::vector<Stats> stats(threads);
    std::atomic<bool> too_deep{false};

    auto worker = [&](std::size_t t) {
        auto &h = handles[t];
        auto &st = stats[t];
        std::vector<Element> spill;
        for (;;) {
            auto item = h.try_pop();
            if (!item && !spill.empty()) {
                item = spill.back();
                spill.pop_back();
            }
            if (!item) {
                if (too_deep.load(std::memory_order_relaxed) || detector.quiescent()) {
                    return;
                }
                std::this_thread::yield();
                continue;
            }
            auto const e = SearchElement::unpack(*item);
            if (e.distance > dist.get(e.source, e.node)) {
                ++st.stale;
            } else if (e.distance >= kMaxDistance) {
                too_deep.store(true, std::memory_order_relaxed);
            } else {
                ++st.processed;
                auto const next = e.distance + 1;
                for (auto const u : g.adjacent(e.node)) {
                    if (dist.relax(e.source, u, next)) {
                        detector.created(t);
                        auto const packed = SearchElement{next, e.source, u}.pack();
                        if (!h.push(packed)) {
                            ++st.overflow;
                            spill.push_back(packed);
                        }
                    }
                }
            }
            detector.finished(t);
        }
    };

    auto const start = std::chrono::steady_clock::now();
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker, t);
    }
    pool.clear();
    auto const stop = std::chrono::steady_clock::now();

    if (too_deep.load()) {
        throw std::runtime_error("parallel_bfs: graph diameter exceeds the distance cap");
    }

    BfsResult result;
    result.sources = sources.size();
    result.n = g.n;
    result.distances = dist.flatten();
    result.seconds = std::chrono::duration<double>(stop - start).count();
    for (auto const &st : stats) {
        result.processed += st.processed;
        result.stale_pops += st.stale;
        result.overflow_pushes += st.overflow;
    }
    return result;
}

/// Builds a queue from `spec` sized for the graph and runs parallel_bfs.
BfsResult run_bfs(Graph const &g, std::span<NodeId const> sources, QueueSpec const &spec, std::size_t threads,
                  std::uint64_t seed);

inline constexpr char const *kBfsCsvHeader = "graph,n,m,sources,queue,params,threads,time_s,stale_pops,checksum";

}  // namespace rfifo
