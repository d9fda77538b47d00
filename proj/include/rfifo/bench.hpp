#pragma once

#include "rfifo/queue_factory.hpp"
#include "rfifo/rank_analyzer.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rfifo {

enum class Workload { push_pop, prodcon };

Workload parse_workload(std::string_view name);
std::string_view to_string(Workload w) noexcept;

struct BenchConfig {
    Workload workload = Workload::push_pop;
    QueueSpec queue{};
    std::size_t threads = 1;
    std::size_t producers = 0;  // prodcon only
    std::size_t consumers = 0;  // prodcon only
    std::size_t prefill = 0;    // 0 = default_prefill()
    double duration_s = 1.0;
    std::uint64_t seed = 1;
    bool record_ranks = false;
    bool pin = false;
    /// Iterations (push-pop) or operations (prodcon) per thread after which a
    /// worker stops early; 0 = run for the full duration.
    std::size_t op_limit = 0;
    /// Push-pop workers yield the CPU after every this many iterations; 0 = never.
    std::size_t yield_every = 0;
};

struct BenchResult {
    double throughput = 0.0;  // iterations/s (push-pop), min(pushes, pops)/s (prodcon)
    double wall_time_s = 0.0;
    std::vector<std::uint64_t> per_thread_ops;
    std::uint64_t pushes = 0;
    std::uint64_t pops = 0;
    std::uint64_t failed_pushes = 0;
    std::uint64_t failed_pops = 0;
    std::uint64_t drained = 0;  // elements left in the queue after the run
    bool pinned = false;
    bool valid = true;
    std::string error;
    std::optional<RankReport> ranks;
};

/// max(10^5, 100 * p * max(C, c)).
std::size_t default_prefill(BenchConfig const &cfg);

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(BenchConfig const &cfg);

/// Each thread alternates push and pop around a prefilled queue.
BenchResult run_push_pop(BenchConfig const &cfg);

/// Producers only push, consumers only pop.
BenchResult run_prodcon(BenchConfig const &cfg);

BenchResult run_benchmark(BenchConfig const &cfg);

inline constexpr char const *kBenchCsvHeader =
    "queue,params,workload,threads,producers,consumers,duration_s,ops_per_s,failed_pops,rank_mean,rank_max,rank_p99,"
    "seed";

std::string csv_row(BenchConfig const &cfg, BenchResult const &result);

/// Appends one row per result to `path`, writing the header first if the file
/// is new or empty. Throws std::runtime_error on I/O failure.
void emit_csv(std::string const &path, BenchConfig const &cfg, std::span<BenchResult const> results);

}  // namespace rfifo
