#include "support/stress.hpp"

#include "rfifo/multi_fifo.hpp"

#include <doctest.h>

#include <atomic>
#include <thread>

using namespace rfifo;

namespace {

MultiFifoParams params(std::size_t threads, std::size_t c, std::size_t s = 1, std::size_t m = 1024) {
    MultiFifoParams p;
    p.threads = threads;
    p.queue_factor = c;
    p.stickiness = s;
    p.queue_capacity = m;
    return p;
}

}  // namespace

TEST_CASE("expected rank error formula") {
    CHECK(mf_rank_error_expectation(2, 4) == doctest::Approx(5.6875));
    CHECK(mf_rank_error_expectation(2, 8) == doctest::Approx(12.34375).epsilon(1e-4));
    CHECK(mf_rank_error_expectation(2, 1) == doctest::Approx(0.75));
    CHECK_THROWS_AS(mf_rank_error_expectation(1, 4), std::invalid_argument);
    CHECK_THROWS_AS(mf_rank_error_expectation(2, 0), std::invalid_argument);
}

TEST_CASE("construction") {
    MultiFifo q(params(4, 3, 2, 100));
    CHECK(q.num_queues() == 12);
    CHECK(q.queue_capacity() == 128);
    CHECK(q.capacity() == 12 * 128);
    CHECK_THROWS_AS(MultiFifo(params(4, 1)), std::invalid_argument);
    CHECK_THROWS_AS(MultiFifo(params(0, 2)), std::invalid_argument);
    CHECK_THROWS_AS(MultiFifo(params(1, 2, 0)), std::invalid_argument);
}

TEST_CASE("first push gets stamp zero") {
    MultiFifo q(params(2, 2));
    auto h = q.get_handle(0);
    CHECK(h.push(7));
    auto const idx = h.last_push_queue();
    CHECK(q.head_stamp(idx) == 0);
    CHECK(q.size() == 1);
    for (std::size_t i = 0; i < q.num_queues(); ++i) {
        if (i != idx) {
            CHECK(q.head_stamp(i) == MultiFifo::kEmptyStamp);
        }
    }
    CHECK(h.try_pop() == 7);
    CHECK(q.head_stamp(idx) == MultiFifo::kEmptyStamp);
}

TEST_CASE("push fails only when every sub-queue is full") {
    MultiFifo q(params(1, 2, 1, 16));
    auto h = q.get_handle(0);
    for (Element v = 0; v < 32; ++v) {
        REQUIRE(h.push(v));
    }
    CHECK_FALSE(h.push(99));
    CHECK(q.size() == 32);
    CHECK(q.check_invariants());
}

TEST_CASE("stickiness keeps the push queue for s operations") {
    bool rerandomized = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto p = params(1, 16, 4);
        p.seed = seed;
        MultiFifo q(p);
        auto h = q.get_handle(0);
        std::vector<std::size_t> trace;
        for (Element v = 0; v < 5; ++v) {
            h.push(v);
            trace.push_back(h.last_push_queue());
        }
        CHECK(trace[1] == trace[0]);
        CHECK(trace[2] == trace[0]);
        CHECK(trace[3] == trace[0]);
        rerandomized = rerandomized || trace[4] != trace[0];
    }
    CHECK(rerandomized);
}

TEST_CASE("pop takes the older of the sampled heads") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto p = params(1, 2);
        p.seed = seed;
        MultiFifo q(p);
        auto h = q.get_handle(0);
        // Single thread: stamp k belongs to value 100 + k.
        for (Element v = 0; v < 8; ++v) {
            h.push(100 + v);
        }
        while (q.size() > 0) {
            auto const expected = std::min(q.head_stamp(0), q.head_stamp(1));
            CHECK(h.try_pop() == 100 + expected);
        }
    }
}

TEST_CASE("two sub-queues behave as an exact FIFO") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto p = params(1, 2);
        p.seed = seed;
        MultiFifo q(p);
        auto h = q.get_handle(0);
        for (Element v = 1; v <= 6; ++v) {
            h.push(v);
        }
        for (Element v = 1; v <= 6; ++v) {
            CHECK(h.try_pop() == v);
        }
        CHECK_FALSE(h.try_pop().has_value());
    }
}

TEST_CASE("pop of a fresh structure fails") {
    MultiFifo q(params(4, 2));
    auto h = q.get_handle(0);
    CHECK_FALSE(h.try_pop().has_value());
}

TEST_CASE("pop finds a lone element through the full scan") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto p = params(8, 4);
        p.seed = seed;
        MultiFifo q(p);
        auto a = q.get_handle(0);
        auto b = q.get_handle(1);
        a.push(42);
        CHECK(b.try_pop() == 42);
        CHECK_FALSE(b.try_pop().has_value());
    }
}

namespace {

// Checks, at the moment a pop commits to a queue, that the chosen head is no
// newer than the head of the other sampled queue.
class DominanceHook final : public Hook {
   public:
    explicit DominanceHook(MultiFifo const &q) : q_(&q) {
    }
    void on(HookPoint point, std::int64_t chosen, std::int64_t other) override {
        if (point != HookPoint::pop_validated) {
            return;
        }
        checks_.fetch_add(1, std::memory_order_relaxed);
        auto const a = q_->head_stamp(static_cast<std::size_t>(chosen));
        auto const b = q_->head_stamp(static_cast<std::size_t>(other));
        if (a > b) {
            violations_.fetch_add(1, std::memory_order_relaxed);
        }
    }
    std::atomic<std::uint64_t> checks_{0};
    std::atomic<std::uint64_t> violations_{0};

   private:
    MultiFifo const *q_;
};

}  // namespace

TEST_CASE("two-choice dominance") {
    auto p = params(4, 2, 1, 1 << 14);
    MultiFifo q(p);
    DominanceHook hook(q);
    q.set_hook(&hook);
    auto const out = testing::run_conservation(q, 4, 20000, 1);
    q.set_hook(nullptr);
    CHECK(out.ok);
    CHECK(hook.checks_.load() > 0);
    CHECK(hook.violations_.load() == 0);
}

TEST_CASE("conservation and per-queue stamp order") {
    for (std::size_t threads : {2, 4, 8}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto p = params(threads, 2, 1 + seed, 1 << 14);
            p.seed = seed;
            MultiFifo q(p);
            auto const out = testing::run_conservation(q, threads, 10000, seed);
            CHECK_MESSAGE(out.ok, out.message);
            CHECK(q.check_invariants());
        }
    }
    // Invariants also hold with elements left behind.
    MultiFifo q(params(4, 2, 2, 1 << 12));
    std::atomic<std::size_t> popped{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < 4; ++t) {
            pool.emplace_back([&, t] {
                auto h = q.get_handle(t);
                for (Element v = 0; v < 3000; ++v) {
                    h.push(testing::tag(t, v));
                    if (v % 3 == 0 && h.try_pop()) {
                        popped.fetch_add(1);
                    }
                }
            });
        }
    }
    CHECK(q.size() == 4 * 3000 - popped.load());
    CHECK(q.check_invariants());
}
