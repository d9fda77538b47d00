#include "rfifo/bfs.hpp"

#include <algorithm>
#include <queue>

namespace rfifo {

DistanceTable::DistanceTable(std::size_t sources, std::uint64_t n)
    : sources_(sources), n_(n), cells_(std::make_unique<std::atomic<std::uint32_t>[]>(sources * n)) {
    for (std::size_t i = 0; i < sources * n; ++i) {
        cells_[i].store(kUnreached, std::memory_order_relaxed);
    }
}

std::vector<std::uint32_t> DistanceTable::flatten() const {
    std::vector<std::uint32_t> out(sources_ * n_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = cells_[i].load(std::memory_order_acquire);
    }
    return out;
}

TerminationDetector::TerminationDetector(std::size_t workers)
    : num_slots_(workers + 1), slots_(std::make_unique<Slot[]>(workers + 1)) {
}

std::uint64_t TerminationDetector::collect(std::vector<std::uint64_t> &out) const noexcept {
    std::uint64_t balance = 0;
    for (std::size_t i = 0; i < num_slots_; ++i) {
        out[2 * i] = slots_[i].created.load(std::memory_order_seq_cst);
        out[2 * i + 1] = slots_[i].finished.load(std::memory_order_seq_cst);
        balance += out[2 * i] - out[2 * i + 1];
    }
    return balance;
}

bool TerminationDetector::quiescent() const noexcept {
    std::vector<std::uint64_t> first(2 * num_slots_);
    std::vector<std::uint64_t> second(2 * num_slots_);
    if (collect(first) != 0) {
        return false;
    }
    collect(second);
    return first == second;
}

void check_bfs_inputs(Graph const &g, std::span<NodeId const> sources) {
    if (sources.empty() || sources.size() > kMaxSources) {
        throw std::invalid_argument("bfs: between 1 and 256 sources required");
    }
    if (g.n >= (std::uint64_t{1} << 32)) {
        throw std::invalid_argument("bfs: node count must be below 2^32");
    }
    for (auto const s : sources) {
        if (s >= g.n) {
            throw std::invalid_argument("bfs: source out of range");
        }
    }
}

BfsResult sequential_bfs(Graph const &g, std::span<NodeId const> sources) {
    check_bfs_inputs(g, sources);
    auto const start = std::chrono::steady_clock::now();
    BfsResult result;
    result.sources = sources.size();
    result.n = g.n;
    result.distances.assign(sources.size() * g.n, kUnreached);
    std::vector<NodeId> frontier;
    for (std::size_t si = 0; si < sources.size(); ++si) {
        auto *dist = result.distances.data() + si * g.n;
        frontier.clear();
        frontier.push_back(sources[si]);
        dist[sources[si]] = 0;
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            auto const v = frontier[head];
            ++result.processed;
            for (auto const u : g.adjacent(v)) {
                if (dist[u] == kUnreached) {
                    dist[u] = dist[v] + 1;
                    frontier.push_back(u);
                }
            }
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::uint64_t checksum(BfsResult const &result) noexcept {
    std::uint64_t sum = 0;
    for (auto const d : result.distances) {
        if (d != kUnreached) {
            sum += std::uint64_t{d} + 1;
        }
    }
    return sum;
}

std::vector<NodeId> choose_sources(Graph const &g, std::size_t s, std::uint64_t seed) {
    if (s == 0 || s > kMaxSources || s > g.n) {
        throw std::invalid_argument("choose_sources: need 1 <= s <= min(256, n)");
    }
    auto rng = make_rng(seed, 0x5eed);
    std::vector<NodeId> picked;
    while (picked.size() < s) {
        auto const v = static_cast<NodeId>(random_index(rng, g.n));
        if (std::find(picked.begin(), picked.end(), v) == picked.end()) {
            picked.push_back(v);
        }
    }
    return picked;
}

BfsResult run_bfs(Graph const &g, std::span<NodeId const> sources, QueueSpec const &spec, std::size_t threads,
                  std::uint64_t seed) {
    auto const capacity = std::max<std::size_t>(g.num_arcs() + sources.size(), 1024);
    auto const sized = sized_for(spec, threads, capacity, seed);
    return with_queue(sized, [&](auto &queue) { return parallel_bfs(queue, g, sources, threads); });
}

}  // namespace rfifo
