#include "rfifo/rank_analyzer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rfifo {

namespace {

class Fenwick {
    std::vector<std::int64_t> tree_;

   public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {
    }

    void add(std::size_t i, std::int64_t delta) noexcept {
        for (++i; i < tree_.size(); i += i & (~i + 1)) {
            tree_[i] += delta;
        }
    }

    // Sum over [0, i).
    [[nodiscard]] std::int64_t prefix(std::size_t i) const noexcept {
        std::int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) {
            s += tree_[i];
        }
        return s;
    }
};

}  // namespace

std::size_t rank_bucket(std::uint64_t error) noexcept {
    return error == 0 ? 0 : static_cast<std::size_t>(std::bit_width(error));
}

std::uint64_t RankReport::percentile(double q) const {
    if (count == 0) {
        return 0;
    }
    auto const target = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count)));
    std::uint64_t cum = 0;
    for (std::size_t k = 0; k < histogram.size(); ++k) {
        cum += histogram[k];
        if (cum >= std::max<std::uint64_t>(target, 1)) {
            return k == 0 ? 0 : std::min(max, (std::uint64_t{1} << k) - 1);
        }
    }
    return max;
}

RankReport replay(std::span<OpRecord const> records) {
    std::size_t num_pushes = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i > 0 && records[i].stamp <= records[i - 1].stamp) {
            throw std::invalid_argument("replay: records not strictly sorted by stamp at position " +
                                        std::to_string(i));
        }
        if (records[i].kind == OpKind::push) {
            ++num_pushes;
        }
    }

    Fenwick live(num_pushes);
    std::unordered_map<Element, std::size_t> ordinal_of;
    ordinal_of.reserve(num_pushes);

    RankReport report;
    std::size_t next_ordinal = 0;
    long double sum = 0;
    for (auto const &rec : records) {
        if (rec.kind == OpKind::push) {
            auto [it, inserted] = ordinal_of.emplace(rec.value, next_ordinal);
            if (!inserted) {
                throw std::invalid_argument("replay: value " + std::to_string(rec.value) +
                                            " pushed while still live (stamp " + std::to_string(rec.stamp) + ")");
            }
            live.add(next_ordinal++, 1);
            continue;
        }
        if (rec.value == kBottom) {
            continue;
        }
        auto it = ordinal_of.find(rec.value);
        if (it == ordinal_of.end()) {
            throw std::invalid_argument("replay: pop of value " + std::to_string(rec.value) +
                                        " without a matching live push (stamp " + std::to_string(rec.stamp) + ")");
        }
        auto const ordinal = it->second;
        ordinal_of.erase(it);
        auto const error = static_cast<std::uint64_t>(live.prefix(ordinal));
        live.add(ordinal, -1);

        auto const bucket = rank_bucket(error);
        if (report.histogram.size() <= bucket) {
            report.histogram.resize(bucket + 1, 0);
        }
        ++report.histogram[bucket];
        ++report.count;
        report.max = std::max(report.max, error);
        sum += error;
    }
    report.mean = report.count == 0 ? 0.0 : static_cast<double>(sum / report.count);
    return report;
}

std::string to_csv(RankReport const &report) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << report.count << ',' << report.mean << ',' << report.max << ',' << report.percentile(0.5)
        << ',' << report.percentile(0.99) << ',' << report.percentile(0.999);
    return out.str();
}

}  // namespace rfifo
