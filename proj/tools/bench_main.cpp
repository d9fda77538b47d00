#include "queue_options.hpp"
#include "rfifo/bench.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <vector>

int main(int argc, char **argv) {
    using namespace rfifo;

    CLI::App app{"Throughput and rank-error benchmark for the relaxed queues"};
    BenchConfig cfg;
    cli::QueueOptions queue;
    std::string workload = "pushpop";
    std::string csv_path;
    std::size_t reps = 1;

    app.add_option("--workload", workload, "pushpop or prodcon")->check(CLI::IsMember({"pushpop", "prodcon"}));
    queue.add_to(app);
    app.add_option("--threads", cfg.threads, "Worker threads")->required()->check(CLI::PositiveNumber);
    app.add_option("--producers", cfg.producers, "Producer threads (prodcon)");
    app.add_option("--consumers", cfg.consumers, "Consumer threads (prodcon)");
    app.add_option("--prefill", cfg.prefill, "Elements inserted before timing (0 = default)");
    app.add_option("--duration-s", cfg.duration_s, "Measured duration in seconds")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Root seed");
    app.add_flag("--record-ranks", cfg.record_ranks, "Log operations and report rank errors");
    app.add_flag("--pin", cfg.pin, "Pin worker threads to CPUs");
    app.add_option("--yield-every", cfg.yield_every, "Push-pop workers yield after this many iterations (0 = never)");
    app.add_option("--csv", csv_path, "Append result rows to this CSV file")->required();
    app.add_option("--reps", reps, "Repetitions; repetition r uses seed + r")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.workload = parse_workload(workload);
        cfg.queue = queue.finish();
        if (cfg.workload == Workload::prodcon && cfg.producers == 0 && cfg.consumers == 0) {
            cfg.producers = cfg.threads / 2;
            cfg.consumers = cfg.threads - cfg.producers;
        }
        validate(cfg);
    } catch (std::exception const &e) {
        std::fprintf(stderr, "bench: %s\n", e.what());
        return 2;
    }

    int status = 0;
    auto const base_seed = cfg.seed;
    for (std::size_t r = 0; r < reps; ++r) {
        auto run = cfg;
        run.seed = base_seed + r;
        try {
            auto const result = run_benchmark(run);
            emit_csv(csv_path, run, std::span<BenchResult const>(&result, 1));
            std::printf("%s\n", csv_row(run, result).c_str());
            if (!result.valid) {
                std::fprintf(stderr, "bench: invalid run (seed %llu): %s\n",
                             static_cast<unsigned long long>(run.seed), result.error.c_str());
                status = 1;
            }
        } catch (std::exception const &e) {
            std::fprintf(stderr, "bench: %s\n", e.what());
            return 2;
        }
    }
    return status;
}
