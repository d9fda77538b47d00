#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rfifo {

using NodeId = std::uint32_t;

/// Compressed adjacency of an undirected graph, stored symmetrically.
struct Graph {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> offsets{0};  // n + 1 entries
    std::vector<NodeId> neighbors;

    [[nodiscard]] std::uint64_t num_arcs() const noexcept {
        return neighbors.size();
    }
    [[nodiscard]] std::span<NodeId const> adjacent(NodeId v) const noexcept {
        return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
    }
    [[nodiscard]] std::uint64_t degree(NodeId v) const noexcept {
        return offsets[v + 1] - offsets[v];
    }

    /// Throws std::invalid_argument if the adjacency arrays are inconsistent.
    void validate() const;
};

/// Symmetric graph from undirected edges; each edge {u, v} yields the arcs
/// u->v and v->u, so a self-loop appears twice in its node's list.
Graph from_edges(std::uint64_t n, std::span<std::pair<NodeId, NodeId> const> edges);

/// n * avg_deg / 2 edges drawn uniformly with replacement. Deterministic for a
/// given seed.
Graph gen_gnm(std::uint64_t n, std::uint64_t avg_deg, std::uint64_t seed);

/// Whitespace-separated `u v` pairs, one per line. Lines starting with `#` or
/// `%` are skipped. Node ids are compacted to [0, n) in increasing order.
/// Throws std::runtime_error naming the offending line.
Graph read_edge_list(std::istream &in);
Graph read_edge_list(std::string const &path);

}  // namespace rfifo
