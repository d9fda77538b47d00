#include "rfifo/graph.hpp"

#include "rfifo/element.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace rfifo {

namespace {

constexpr std::uint64_t kMaxNodes = std::uint64_t{1} << 32;

void check_node_count(std::uint64_t n) {
    if (n >= kMaxNodes) {
        throw std::invalid_argument("graph: node count must be below 2^32");
    }
}

std::string_view trim(std::string_view s) {
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

bool next_id(std::string_view &rest, std::uint64_t &out) {
    rest = trim(rest);
    if (rest.empty()) {
        return false;
    }
    auto const *end = rest.data() + rest.size();
    auto const [ptr, ec] = std::from_chars(rest.data(), end, out);
    if (ec != std::errc{} || (ptr != end && *ptr != ' ' && *ptr != '\t')) {
        return false;
    }
    rest = rest.substr(static_cast<std::size_t>(ptr - rest.data()));
    return true;
}

}  // namespace

void Graph::validate() const {
    check_node_count(n);
    if (offsets.size() != n + 1 || offsets.front() != 0) {
        throw std::invalid_argument("graph: offsets must have n + 1 entries starting at 0");
    }
    if (!std::is_sorted(offsets.begin(), offsets.end())) {
        throw std::invalid_argument("graph: offsets must be non-decreasing");
    }
    if (offsets.back() != neighbors.size()) {
        throw std::invalid_argument("graph: offsets[n] must equal the neighbor count");
    }
    for (auto const u : neighbors) {
        if (u >= n) {
            throw std::invalid_argument("graph: neighbor id out of range");
        }
    }
}

Graph from_edges(std::uint64_t n, std::span<std::pair<NodeId, NodeId> const> edges) {
    check_node_count(n);
    Graph g;
    g.n = n;
    g.offsets.assign(n + 1, 0);
    for (auto const &[u, v] : edges) {
        if (u >= n || v >= n) {
            throw std::invalid_argument("from_edges: node id out of range");
        }
        ++g.offsets[u + 1];
        ++g.offsets[v + 1];
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        g.offsets[i + 1] += g.offsets[i];
    }
    g.neighbors.resize(g.offsets[n]);
    std::vector<std::uint64_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (auto const &[u, v] : edges) {
        g.neighbors[fill[u]++] = v;
        g.neighbors[fill[v]++] = u;
    }
    return g;
}

Graph gen_gnm(std::uint64_t n, std::uint64_t avg_deg, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("gen_gnm: n must be positive");
    }
    check_node_count(n);
    auto const m = n * avg_deg / 2;
    auto rng = make_rng(seed, 0);
    std::vector<std::pair<NodeId, NodeId>> edges(m);
    for (auto &e : edges) {
        e.first = static_cast<NodeId>(random_index(rng, n));
        e.second = static_cast<NodeId>(random_index(rng, n));
    }
    return from_edges(n, edges);
}

Graph read_edge_list(std::istream &in) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto rest = trim(line);
        if (rest.empty() || rest.front() == '#' || rest.front() == '%') {
            continue;
        }
        std::uint64_t u = 0;
        std::uint64_t v = 0;
        if (!next_id(rest, u) || !next_id(rest, v) || !trim(rest).empty()) {
            throw std::runtime_error("edge list: malformed line " + std::to_string(line_no) + ": '" + line + "'");
        }
        raw.emplace_back(u, v);
    }
    if (in.bad()) {
        throw std::runtime_error("edge list: read error");
    }

    std::vector<std::uint64_t> ids;
    ids.reserve(raw.size() * 2);
    for (auto const &[u, v] : raw) {
        ids.push_back(u);
        ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    check_node_count(ids.size());

    auto const compact = [&](std::uint64_t id) {
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(raw.size());
    for (auto const &[u, v] : raw) {
        edges.emplace_back(compact(u), compact(v));
    }
    return from_edges(ids.size(), edges);
}

Graph read_edge_list(std::string const &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("edge list: cannot open '" + path + "'");
    }
    return read_edge_list(in);
}

}  // namespace rfifo
