#include "rfifo/op_log.hpp"

#include <functional>
#include <queue>
#include <tuple>
#include <utility>

namespace rfifo {

Recorder::Recorder(std::size_t num_logs, std::size_t reserve_per_log) {
    logs_.reserve(num_logs);
    for (std::size_t i = 0; i < num_logs; ++i) {
        logs_.emplace_back(clock_, reserve_per_log);
    }
}

std::vector<OpRecord> Recorder::merged() const {
    std::size_t total = 0;
    for (auto const &l : logs_) {
        total += l.records().size();
    }
    std::vector<OpRecord> out;
    out.reserve(total);

    // (stamp, log index, position); each log is already sorted by stamp.
    using Cursor = std::tuple<std::uint64_t, std::size_t, std::size_t>;
    std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
    for (std::size_t i = 0; i < logs_.size(); ++i) {
        if (!logs_[i].records().empty()) {
            heap.emplace(logs_[i].records().front().stamp, i, 0);
        }
    }
    while (!heap.empty()) {
        auto [stamp, li, pos] = heap.top();
        heap.pop();
        auto const &recs = logs_[li].records();
        out.push_back(recs[pos]);
        if (pos + 1 < recs.size()) {
            heap.emplace(recs[pos + 1].stamp, li, pos + 1);
        }
    }
    return out;
}

}  // namespace rfifo
