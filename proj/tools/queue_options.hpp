#pragma once

#include "rfifo/queue_factory.hpp"

#include <CLI11.hpp>

#include <string>

namespace rfifo::cli {

/// Queue selection flags shared by the bench and bfs tools.
struct QueueOptions {
    std::string kind = "bf";
    bool no_bitset = false;
    QueueSpec spec{};

    void add_to(CLI::App &app);
    /// Applies the parsed flags to `spec`.
    QueueSpec finish();
};

}  // namespace rfifo::cli
