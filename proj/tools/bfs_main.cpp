#include "queue_options.hpp"
#include "rfifo/bfs.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

bool needs_header(std::string const &path) {
    std::error_code ec;
    return !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
}

}  // namespace

int main(int argc, char **argv) {
    using namespace rfifo;

    CLI::App app{"Parallel breadth-first search over a relaxed queue"};
    cli::QueueOptions queue;
    std::string graph_kind = "gnm";
    std::uint64_t n = 1 << 14;
    std::uint64_t avg_deg = 64;
    std::string path;
    std::size_t num_sources = 1;
    std::size_t threads = 1;
    std::uint64_t seed = 1;
    std::string csv_path;
    bool verify = false;

    app.add_option("--graph", graph_kind, "gnm or file")->check(CLI::IsMember({"gnm", "file"}));
    app.add_option("--n", n, "GNM node count")->check(CLI::PositiveNumber);
    app.add_option("--avg-deg", avg_deg, "GNM average degree");
    app.add_option("--path", path, "Edge-list file");
    app.add_option("--sources", num_sources, "Simultaneous searches (1..256)")->check(CLI::Range(1, 256));
    queue.add_to(app);
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for the generator, sources and queue");
    app.add_option("--csv", csv_path, "Append the result row to this CSV file")->required();
    app.add_flag("--verify", verify, "Compare against a sequential BFS");

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph_kind == "file" && path.empty()) {
            throw std::invalid_argument("--graph file requires --path");
        }
        auto const g = graph_kind == "gnm" ? gen_gnm(n, avg_deg, seed) : read_edge_list(path);
        auto const sources = choose_sources(g, num_sources, seed);
        auto const spec = queue.finish();
        auto const result = run_bfs(g, sources, spec, threads, seed);
        auto const sum = checksum(result);

        auto const capacity = std::max<std::size_t>(g.num_arcs() + sources.size(), 1024);
        std::ostringstream row;
        row << (graph_kind == "gnm" ? "gnm" : std::filesystem::path(path).filename().string()) << ',' << g.n << ','
            << g.num_arcs() << ',' << sources.size() << ',' << to_string(spec.kind) << ','
            << describe(sized_for(spec, threads, capacity, seed)) << ',' << threads << ',' << result.seconds << ','
            << result.stale_pops << ',' << sum;

        bool const header = needs_header(csv_path);
        std::ofstream out(csv_path, std::ios::app);
        if (!out) {
            throw std::runtime_error("cannot open CSV file '" + csv_path + "'");
        }
        if (header) {
            out << kBfsCsvHeader << '\n';
        }
        out << row.str() << '\n';
        std::printf("%s\n", row.str().c_str());

        if (verify) {
            auto const oracle = sequential_bfs(g, sources);
            bool const ok = oracle.distances == result.distances;
            std::printf("verify: %s (sequential %.6f s)\n", ok ? "match" : "MISMATCH", oracle.seconds);
            if (!ok) {
                return 1;
            }
        }
    } catch (std::exception const &e) {
        std::fprintf(stderr, "bfs: %s\n", e.what());
        return 2;
    }
    return 0;
}
