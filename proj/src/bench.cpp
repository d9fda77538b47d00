#include "rfifo/bench.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <latch>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rfifo {

namespace {

using Clock = std::chrono::steady_clock;

struct alignas(kCacheLine) ThreadStats {
    std::uint64_t ops = 0;
    std::uint64_t pushes = 0;
    std::uint64_t pops = 0;
    std::uint64_t failed_pushes = 0;
    std::uint64_t failed_pops = 0;
    std::uint64_t pushed_sum = 0;
    std::uint64_t popped_sum = 0;
};

// Pushed values are (owner + 1) << 40 | counter; owner 0 is the prefill.
constexpr Element tagged(std::size_t owner, std::uint64_t counter) noexcept {
    return (static_cast<Element>(owner + 1) << 40) | counter;
}

bool pin_to_cpu(std::thread &t, std::size_t index) {
    auto const cpus = std::max(1U, std::thread::hardware_concurrency());
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<int>(index % cpus), &set);
    return pthread_setaffinity_np(t.native_handle(), sizeof(set), &set) == 0;
}

std::size_t queue_capacity_for(BenchConfig const &cfg, std::size_t prefill) {
    return 2 * (prefill + cfg.threads) + 1024;
}

struct Session {
    std::vector<ThreadStats> stats;
    std::unique_ptr<Recorder> recorder;
    std::atomic<bool> stop{false};
    bool pinned = true;
};

// Starts `n` workers, lets them run until `duration` elapses or all of them
// return, and reports the measured wall time.
template <typename Body>
double run_workers(BenchConfig const &cfg, Session &session, std::size_t n, Body body) {
    std::latch ready(static_cast<std::ptrdiff_t>(n) + 1);
    std::atomic<std::size_t> finished{0};
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        workers.emplace_back([&, t] {
            ready.arrive_and_wait();
            body(t);
            finished.fetch_add(1, std::memory_order_acq_rel);
        });
        if (cfg.pin) {
            session.pinned = pin_to_cpu(workers.back(), t) && session.pinned;
        }
    }
    ready.arrive_and_wait();
    auto const start = Clock::now();
    auto const deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.duration_s));
    while (Clock::now() < deadline && finished.load(std::memory_order_acquire) < n) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    session.stop.store(true, std::memory_order_release);
    for (auto &w : workers) {
        w.join();
    }
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <ConcurrentQueue Q>
void prefill_queue(Q &queue, BenchConfig const &cfg, std::size_t prefill, Session &session, BenchResult &result) {
    auto handle = queue.get_handle(cfg.threads);
    if (session.recorder) {
        handle.attach_log(&session.recorder->log(cfg.threads));
    }
    for (std::size_t i = 0; i < prefill; ++i) {
        auto const v = tagged(cfg.threads, i);
        if (!handle.push(v)) {
            throw std::invalid_argument("benchmark: queue too small for the prefill");
        }
        result.pushes += 1;
    }
}

// Single-threaded drain after the run; checks that nothing was lost or duplicated.
template <ConcurrentQueue Q>
void drain_and_check(Q &queue, BenchConfig const &cfg, Session &session, std::uint64_t prefill_count,
                     std::uint64_t prefill_sum, BenchResult &result) {
    auto handle = queue.get_handle(cfg.threads);
    std::uint64_t drained_sum = 0;
    while (auto e = handle.try_pop()) {
        drained_sum += *e;
        ++result.drained;
    }
    std::uint64_t pushed = prefill_count, popped = 0;
    std::uint64_t pushed_sum = prefill_sum, popped_sum = 0;
    for (auto const &s : session.stats) {
        pushed += s.pushes;
        popped += s.pops;
        pushed_sum += s.pushed_sum;
        popped_sum += s.popped_sum;
    }
    if (pushed != popped + result.drained || pushed_sum != popped_sum + drained_sum) {
        result.valid = false;
        result.error = "conservation violated: pushed " + std::to_string(pushed) + ", popped " +
                       std::to_string(popped) + ", drained " + std::to_string(result.drained);
    }
}

void collect(Session &session, BenchResult &result, std::size_t prefill_pushes) {
    result.pushes = prefill_pushes;
    for (auto const &s : session.stats) {
        result.per_thread_ops.push_back(s.ops);
        result.pushes += s.pushes;
        result.pops += s.pops;
        result.failed_pushes += s.failed_pushes;
        result.failed_pops += s.failed_pops;
    }
    result.pinned = session.pinned;
}

void attach_recorder(BenchConfig const &cfg, Session &session) {
    if (!cfg.record_ranks) {
        return;
    }
    auto const per_thread = cfg.op_limit > 0 ? 2 * cfg.op_limit + 16 : std::size_t{1} << 20;
    session.recorder = std::make_unique<Recorder>(cfg.threads + 1, per_thread);
}

template <ConcurrentQueue Q>
BenchResult push_pop_on(Q &queue, BenchConfig const &cfg, std::size_t prefill) {
    Session session;
    session.stats.resize(cfg.threads);
    attach_recorder(cfg, session);

    BenchResult result;
    prefill_queue(queue, cfg, prefill, session, result);
    std::uint64_t prefill_sum = 0;
    for (std::size_t i = 0; i < prefill; ++i) {
        prefill_sum += tagged(cfg.threads, i);
    }
    auto const prefill_pushes = result.pushes;

    result.wall_time_s = run_workers(cfg, session, cfg.threads, [&](std::size_t t) {
        auto handle = queue.get_handle(t);
        if (session.recorder) {
            handle.attach_log(&session.recorder->log(t));
        }
        auto &s = session.stats[t];
        std::uint64_t counter = 0;
        while (!session.stop.load(std::memory_order_relaxed)) {
            auto const v = tagged(t, counter++);
            if (handle.push(v)) {
                ++s.pushes;
                s.pushed_sum += v;
            } else {
                ++s.failed_pushes;
            }
            if (auto e = handle.try_pop()) {
                ++s.pops;
                s.popped_sum += *e;
            } else {
                ++s.failed_pops;
            }
            if (++s.ops == cfg.op_limit) {
                break;
            }
            if (cfg.yield_every != 0 && s.ops % cfg.yield_every == 0) {
                std::this_thread::yield();
            }
        }
    });

    BenchResult collected = std::move(result);
    collect(session, collected, prefill_pushes);
    std::uint64_t total = 0;
    for (auto ops : collected.per_thread_ops) {
        total += ops;
    }
    collected.throughput = static_cast<double>(total) / collected.wall_time_s;
    if (collected.failed_pops != 0 || collected.failed_pushes != 0) {
        collected.valid = false;
        collected.error = "push-pop run had " + std::to_string(collected.failed_pushes) + " failed pushes and " +
                          std::to_string(collected.failed_pops) + " failed pops";
    }
    if (session.recorder) {
        auto const records = session.recorder->merged();
        collected.ranks = replay(records);
    }
    drain_and_check(queue, cfg, session, prefill_pushes, prefill_sum, collected);
    return collected;
}

template <ConcurrentQueue Q>
BenchResult prodcon_on(Q &queue, BenchConfig const &cfg, std::size_t prefill) {
    Session session;
    session.stats.resize(cfg.threads);
    attach_recorder(cfg, session);

    BenchResult result;
    prefill_queue(queue, cfg, prefill, session, result);
    std::uint64_t prefill_sum = 0;
    for (std::size_t i = 0; i < prefill; ++i) {
        prefill_sum += tagged(cfg.threads, i);
    }
    auto const prefill_pushes = result.pushes;

    result.wall_time_s = run_workers(cfg, session, cfg.threads, [&](std::size_t t) {
        auto handle = queue.get_handle(t);
        if (session.recorder) {
            handle.attach_log(&session.recorder->log(t));
        }
        auto &s = session.stats[t];
        bool const producer = t < cfg.producers;
        std::uint64_t counter = 0;
        while (!session.stop.load(std::memory_order_relaxed)) {
            if (producer) {
                auto const v = tagged(t, counter);
                if (handle.push(v)) {
                    ++counter;
                    ++s.pushes;
                    s.pushed_sum += v;
                } else {
                    ++s.failed_pushes;
                    std::this_thread::yield();
                }
            } else if (auto e = handle.try_pop()) {
                ++s.pops;
                s.popped_sum += *e;
            } else {
                ++s.failed_pops;
            }
            if (++s.ops == cfg.op_limit) {
                break;
            }
        }
    });

    BenchResult collected = std::move(result);
    collect(session, collected, prefill_pushes);
    std::uint64_t worker_pushes = 0;
    for (auto const &s : session.stats) {
        worker_pushes += s.pushes;
    }
    collected.throughput =
        static_cast<double>(std::min(worker_pushes, collected.pops)) / collected.wall_time_s;
    if (session.recorder) {
        auto const records = session.recorder->merged();
        collected.ranks = replay(records);
    }
    drain_and_check(queue, cfg, session, prefill_pushes, prefill_sum, collected);
    return collected;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << v;
    return out.str();
}

}  // namespace

Workload parse_workload(std::string_view name) {
    if (name == "pushpop") {
        return Workload::push_pop;
    }
    if (name == "prodcon") {
        return Workload::prodcon;
    }
    throw std::invalid_argument("unknown workload '" + std::string(name) + "' (expected pushpop or prodcon)");
}

std::string_view to_string(Workload w) noexcept {
    return w == Workload::push_pop ? "pushpop" : "prodcon";
}

std::size_t default_prefill(BenchConfig const &cfg) {
    std::size_t factor = 1;
    switch (cfg.queue.kind) {
        case QueueKind::bf:
            factor = cfg.queue.bf.block_size;
            break;
        case QueueKind::mf:
            factor = cfg.queue.mf.queue_factor;
            break;
        case QueueKind::strict:
            break;
    }
    return std::max<std::size_t>(100'000, 100 * cfg.threads * factor);
}

void validate(BenchConfig const &cfg) {
    if (cfg.threads == 0) {
        throw std::invalid_argument("threads must be positive");
    }
    if (cfg.duration_s <= 0.0) {
        throw std::invalid_argument("duration must be positive");
    }
    if (cfg.workload == Workload::prodcon) {
        if (cfg.producers == 0 || cfg.consumers == 0 || cfg.producers + cfg.consumers != cfg.threads) {
            throw std::invalid_argument("prodcon requires producers >= 1, consumers >= 1 and producers + consumers = threads");
        }
    }
    if (cfg.queue.kind == QueueKind::bf && cfg.queue.bf.ring_factor != 0 && cfg.queue.bf.ring_factor < 3) {
        throw std::invalid_argument("ring factor must be at least 3");
    }
    if (cfg.queue.kind == QueueKind::mf && (cfg.queue.mf.queue_factor < 2 || cfg.queue.mf.stickiness == 0)) {
        throw std::invalid_argument("MultiFifo requires queue factor >= 2 and stickiness >= 1");
    }
}

BenchResult run_push_pop(BenchConfig const &cfg) {
    auto c = cfg;
    c.workload = Workload::push_pop;
    return run_benchmark(c);
}

BenchResult run_prodcon(BenchConfig const &cfg) {
    auto c = cfg;
    c.workload = Workload::prodcon;
    return run_benchmark(c);
}

BenchResult run_benchmark(BenchConfig const &cfg) {
    validate(cfg);
    auto const prefill = cfg.prefill == 0 ? default_prefill(cfg) : cfg.prefill;
    auto const capacity = queue_capacity_for(cfg, prefill);
    auto const spec = sized_for(cfg.queue, cfg.threads, capacity, cfg.seed);
    if (spec.kind == QueueKind::strict && spec.strict_capacity <= prefill + cfg.threads) {
        throw std::invalid_argument("strict queue capacity must exceed prefill + threads");
    }
    return with_queue(spec, [&](auto &queue) {
        return cfg.workload == Workload::push_pop ? push_pop_on(queue, cfg, prefill)
                                                  : prodcon_on(queue, cfg, prefill);
    });
}

std::string csv_row(BenchConfig const &cfg, BenchResult const &result) {
    auto const prefill = cfg.prefill == 0 ? default_prefill(cfg) : cfg.prefill;
    auto const spec = sized_for(cfg.queue, cfg.threads, queue_capacity_for(cfg, prefill), cfg.seed);
    std::ostringstream out;
    out << to_string(cfg.queue.kind) << ',' << describe(spec);
    if (cfg.pin) {
        out << ";pin=" << (result.pinned ? 1 : 0);
    }
    out << ',' << to_string(cfg.workload) << ',' << cfg.threads << ',';
    if (cfg.workload == Workload::prodcon) {
        out << cfg.producers << ',' << cfg.consumers;
    } else {
        out << ',';
    }
    out << ',' << format_double(cfg.duration_s) << ',' << format_double(result.throughput) << ','
        << result.failed_pops << ',';
    if (result.ranks) {
        out << format_double(result.ranks->mean) << ',' << result.ranks->max << ','
            << result.ranks->percentile(0.99);
    } else {
        out << ",,";
    }
    out << ',' << cfg.seed;
    return out.str();
}

void emit_csv(std::string const &path, BenchConfig const &cfg, std::span<BenchResult const> results) {
    std::error_code ec;
    bool const need_header = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw std::runtime_error("cannot open CSV file '" + path + "'");
    }
    if (need_header) {
        out << kBenchCsvHeader << '\n';
    }
    for (auto const &r : results) {
        out << csv_row(cfg, r) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing CSV file '" + path + "'");
    }
}

}  // namespace rfifo
