#include "support/stress.hpp"

#include "rfifo/block_fifo.hpp"

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>
#include <unordered_map>

using namespace rfifo;

namespace {

BlockFifoParams params(std::size_t threads, std::size_t block_size, std::size_t ring_factor = 4) {
    BlockFifoParams p;
    p.threads = threads;
    p.block_size = block_size;
    p.ring_factor = ring_factor;
    return p;
}

// Runs `action` the first time `point` is reached.
class OnceHook final : public Hook {
   public:
    OnceHook(HookPoint point, std::function<void(std::int64_t)> action)
        : point_(point), action_(std::move(action)) {
    }
    void on(HookPoint point, std::int64_t index, std::int64_t) override {
        if (point == point_ && !fired_) {
            fired_ = true;
            action_(index);
        }
    }
    [[nodiscard]] bool fired() const noexcept {
        return fired_;
    }

   private:
    HookPoint point_;
    std::function<void(std::int64_t)> action_;
    bool fired_ = false;
};

}  // namespace

TEST_CASE("header packing round-trips") {
    BlockHeader const h{0x7fffffffU, 0xffff, 0x1234, true};
    CHECK(BlockHeader::unpack(h.pack()) == h);
    CHECK(BlockHeader{}.pack() == 0);
    CHECK(BlockHeader{1, 0, 0, false}.pack() == (std::uint64_t{1} << 33));
    CHECK(BlockHeader{0, 0, 1, true}.pack() == 0b11);
    CHECK(BlockHeader{0, 1, 0, false}.pack() == (std::uint64_t{1} << 17));
}

TEST_CASE("geometry") {
    BlockFifo q(params(1, 4));
    CHECK(q.window_size() == 32);
    CHECK(q.num_blocks() == 128);
    CHECK(q.capacity() == 512);
    CHECK(q.pop_window() == 0);
    CHECK(q.push_window() == 32);
    CHECK(BlockFifo::window_for(40, 1) == 64);
    CHECK(BlockFifo::window_for(8, 5) == 64);
    CHECK(q.position_of(130) == 2);
    CHECK(q.epoch_of(130) == 1);
    CHECK_THROWS_AS(BlockFifo(params(1, 4, 2)), std::invalid_argument);
    CHECK_THROWS_AS(BlockFifo(params(0, 4)), std::invalid_argument);
    CHECK_THROWS_AS(BlockFifo(params(1, 0)), std::invalid_argument);
}

TEST_CASE("first push claims a block and commits") {
    BlockFifo q(params(1, 4));
    auto h = q.get_handle(0);
    REQUIRE(h.push(9));
    auto const i = h.push_block();
    REQUIRE(i >= q.push_window());
    REQUIRE(i < q.push_window() + 32);
    auto const pos = q.position_of(i);
    CHECK(q.header(pos) == BlockHeader{0, 0, 1, true});
    CHECK(q.cell(pos, 0) == 9);
    CHECK(q.cell(pos, 1) == kBottom);
    CHECK(q.bitset().test(pos, 0));
}

TEST_CASE("pushes fill the cached block in cell order") {
    BlockFifo q(params(1, 4));
    auto h = q.get_handle(0);
    h.push(1);
    auto const i = h.push_block();
    h.push(2);
    h.push(3);
    CHECK(h.push_block() == i);
    h.push(4);  // block now full, cache dropped
    CHECK(h.push_block() == -1);
    auto const pos = q.position_of(i);
    CHECK(q.header(pos) == BlockHeader{0, 0, 4, true});
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(q.cell(pos, s) == s + 1);
    }
}

TEST_CASE("insert_in_block") {
    BlockFifo q(params(1, 4));
    auto h = q.get_handle(0);
    h.push(1);
    auto const i = h.push_block();
    auto const pos = q.position_of(i);

    SUBCASE("commits into the next cell") {
        CHECK(q.insert_in_block(q.header(pos), i, 2));
        CHECK(q.header(pos) == BlockHeader{0, 0, 2, true});
        CHECK(q.cell(pos, 1) == 2);
    }
    SUBCASE("occupied cell is left alone") {
        auto const stale = BlockHeader{0, 0, 0, true};  // cell 0 already holds 1
        CHECK_FALSE(q.insert_in_block(stale, i, 5));
        CHECK(q.cell(pos, 0) == 1);
        CHECK(q.header(pos) == BlockHeader{0, 0, 1, true});
    }
    SUBCASE("full block is rejected") {
        CHECK_FALSE(q.insert_in_block(BlockHeader{0, 0, 4, true}, i, 5));
    }
    SUBCASE("header change between cell write and commit rolls the cell back") {
        auto other = q.get_handle(1);
        std::optional<Element> stolen;
        OnceHook hook(HookPoint::cell_written, [&](std::int64_t) { stolen = other.try_pop(); });
        q.set_hook(&hook);
        bool const ok = q.insert_in_block(q.header(pos), i, 2);
        q.set_hook(nullptr);
        CHECK(hook.fired());
        CHECK_FALSE(ok);
        CHECK(stolen == 1);
        CHECK(q.cell(pos, 1) == kBottom);
        CHECK(q.header(pos) == BlockHeader{1, 0, 0, false});
    }
}

TEST_CASE("push survives a concurrent header change") {
    BlockFifo q(params(2, 4));
    auto a = q.get_handle(0);
    auto b = q.get_handle(1);
    REQUIRE(a.push(1));
    std::optional<Element> stolen;
    OnceHook hook(HookPoint::cell_written, [&](std::int64_t) { stolen = b.try_pop(); });
    q.set_hook(&hook);
    CHECK(a.push(2));
    q.set_hook(nullptr);
    CHECK(stolen == 1);
    CHECK(b.try_pop() == 2);
    CHECK_FALSE(b.try_pop().has_value());
}

TEST_CASE("reserve_element") {
    BlockFifo q(params(1, 4));
    auto const i = q.push_window();
    auto const pos = q.position_of(i);
    for (Element v = 1; v <= 3; ++v) {
        REQUIRE(q.insert_in_block(BlockHeader{0, 0, static_cast<std::uint16_t>(v - 1), v > 1}, i, v));
    }
    REQUIRE(q.header(pos) == BlockHeader{0, 0, 3, true});

    SUBCASE("advances the pop counter") {
        CHECK(q.reserve_element(BlockHeader{0, 0, 3, true}, i));
        CHECK(q.header(pos) == BlockHeader{0, 1, 3, true});
    }
    SUBCASE("closes on the last element") {
        CHECK(q.reserve_element(BlockHeader{0, 0, 3, true}, i));
        CHECK(q.reserve_element(BlockHeader{0, 1, 3, true}, i));
        CHECK(q.reserve_element(BlockHeader{0, 2, 3, true}, i));
        CHECK(q.header(pos) == BlockHeader{1, 0, 0, false});
    }
    SUBCASE("stale header fails") {
        CHECK_FALSE(q.reserve_element(BlockHeader{0, 1, 3, true}, i));
        CHECK(q.header(pos) == BlockHeader{0, 0, 3, true});
    }
}

TEST_CASE("reserving a claimed empty block closes it") {
    BlockFifo q(params(1, 4));
    auto h = q.get_handle(0);
    std::int64_t closed = -1;
    OnceHook hook(HookPoint::cell_written, [&](std::int64_t index) {
        // The pusher has claimed the block but not committed anything.
        REQUIRE(q.header(q.position_of(index)) == BlockHeader{0, 0, 0, true});
        REQUIRE(q.reserve_element(BlockHeader{0, 0, 0, true}, index));
        closed = index;
    });
    q.set_hook(&hook);
    CHECK(h.push(5));
    q.set_hook(nullptr);
    REQUIRE(closed >= 0);
    CHECK(q.header(q.position_of(closed)) == BlockHeader{1, 0, 0, false});
    CHECK(q.cell(q.position_of(closed), 0) == kBottom);
    CHECK(h.push_block() != closed);
    CHECK(h.try_pop() == 5);
}

TEST_CASE("single block pops in cell order") {
    BlockFifo q(params(1, 63));
    auto h = q.get_handle(0);
    h.push(1);
    h.push(2);
    h.push(3);
    CHECK(h.try_pop() == 1);
    CHECK(h.try_pop() == 2);
    CHECK(h.try_pop() == 3);
    CHECK_FALSE(h.try_pop().has_value());
}

TEST_CASE("pop of a fresh queue fails") {
    BlockFifo q(params(4, 63));
    auto h = q.get_handle(0);
    CHECK_FALSE(h.try_pop().has_value());
    CHECK(q.pop_window() == 0);
    CHECK(q.push_window() == 32);
}

TEST_CASE("pop closes the block when taking its last element") {
    BlockFifo q(params(1, 4));
    auto a = q.get_handle(0);
    a.push(1);
    a.push(2);
    a.push(3);
    auto const pos = q.position_of(a.push_block());
    auto b = q.get_handle(1);
    b.try_pop();
    b.try_pop();
    REQUIRE(q.header(pos) == BlockHeader{0, 2, 3, true});
    CHECK(b.try_pop() == 3);
    CHECK(q.header(pos) == BlockHeader{1, 0, 0, false});
    CHECK_FALSE(q.bitset().test(pos, 0));
}

TEST_CASE("push reports full once the ring is exhausted") {
    BlockFifo q(params(1, 1, 3));  // 96 blocks of one cell
    auto h = q.get_handle(0);
    std::size_t accepted = 0;
    while (h.push(accepted + 1)) {
        ++accepted;
    }
    // The pop window's blocks stay reserved for the consumer side.
    CHECK(accepted == 64);
    CHECK(q.push_window() + static_cast<std::int64_t>(q.window_size()) - q.pop_window() ==
          static_cast<std::int64_t>(q.num_blocks()));
    CHECK_FALSE(h.push(1000));
    CHECK(h.try_pop().has_value());
}

TEST_CASE("stale cached push block is skipped") {
    BlockFifo q(params(2, 4));
    auto a = q.get_handle(0);
    auto b = q.get_handle(1);
    a.push(1);
    auto const first = a.push_block();
    REQUIRE(first >= 0);
    REQUIRE(b.try_pop() == 1);  // closes the block, bumping its epoch
    REQUIRE(q.header(q.position_of(first)).epoch == 1);
    a.push(2);
    CHECK(a.push_block() != first);
    CHECK(q.position_of(a.push_block()) != q.position_of(first));
    CHECK(b.try_pop() == 2);
}

TEST_CASE("push window empty check") {
    BlockFifo q(params(1, 1));
    auto const pw = q.push_window();

    SUBCASE("fresh queue") {
        CHECK(q.push_window_empty(pw));
    }
    SUBCASE("committed element") {
        auto h = q.get_handle(0);
        h.push(1);
        CHECK_FALSE(q.push_window_empty(pw));
    }
    SUBCASE("window advanced during the scan") {
        auto h = q.get_handle(1);
        OnceHook hook(HookPoint::empty_scan_done, [&](std::int64_t) {
            for (Element v = 1; v <= 33; ++v) {
                REQUIRE(h.push(v));
            }
        });
        q.set_hook(&hook);
        bool const empty = q.push_window_empty(pw);
        q.set_hook(nullptr);
        CHECK(hook.fired());
        CHECK(q.push_window() == pw + 32);
        CHECK_FALSE(empty);
    }
}

TEST_CASE("pop does not fail when pushes land during its empty check") {
    BlockFifo q(params(2, 1));
    auto a = q.get_handle(0);
    auto b = q.get_handle(1);
    OnceHook hook(HookPoint::empty_scan_done, [&](std::int64_t) {
        for (Element v = 1; v <= 33; ++v) {
            REQUIRE(b.push(v));
        }
    });
    q.set_hook(&hook);
    auto const e = a.try_pop();
    q.set_hook(nullptr);
    CHECK(hook.fired());
    CHECK(e.has_value());
}

TEST_CASE("windows keep their order and hints cover live blocks") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto p = params(4, 7, 16);
        p.seed = seed;
        BlockFifo q(p);
        auto const out = testing::run_conservation(q, 4, 20000, seed);
        CHECK_MESSAGE(out.ok, out.message);
        CHECK(q.pop_window() <= q.push_window() - static_cast<std::int64_t>(q.window_size()));
    }
    // Quiescent points between single-threaded batches.
    BlockFifo q(params(2, 7, 64));
    auto h = q.get_handle(0);
    auto rng = make_rng(3, 0);
    Element next = 0;
    for (int round = 0; round < 300; ++round) {
        auto const pushes = random_index(rng, 40);
        for (std::size_t i = 0; i < pushes; ++i) {
            REQUIRE(h.push(next++));
        }
        auto const pops = random_index(rng, 40);
        for (std::size_t i = 0; i < pops; ++i) {
            h.try_pop();
        }
        REQUIRE(q.pop_window() <= q.push_window() - static_cast<std::int64_t>(q.window_size()));
        REQUIRE(q.hints_cover_live_blocks());
    }
}

TEST_CASE("conservation with and without hints") {
    for (bool bits : {true, false}) {
        for (std::size_t threads : {2, 4}) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                auto p = params(threads, 15, 32);
                p.use_bitset = bits;
                p.seed = seed;
                BlockFifo q(p);
                auto const out = testing::run_conservation(q, threads, 20000, seed);
                CHECK_MESSAGE(out.ok, out.message);
            }
        }
    }
}

TEST_CASE("ring wraps many times without losing elements") {
    auto p = params(4, 3, 3);
    p.seed = 11;
    BlockFifo q(p);
    auto const out = testing::run_conservation(q, 4, 50000, 11);
    CHECK_MESSAGE(out.ok, out.message);
    CHECK(q.push_window() / static_cast<std::int64_t>(q.num_blocks()) >= 3);
}

namespace {

// Stalls threads at random hook points and counts shared-memory steps.
class StallHook final : public Hook {
   public:
    void on(HookPoint, std::int64_t, std::int64_t) override {
        steps_.fetch_add(1, std::memory_order_relaxed);
        thread_local Rng rng = make_rng(99, std::hash<std::thread::id>{}(std::this_thread::get_id()));
        auto const roll = random_index(rng, 64);
        if (roll == 0) {
            std::this_thread::sleep_for(std::chrono::microseconds(50));
        } else if (roll < 8) {
            std::this_thread::yield();
        }
    }
    [[nodiscard]] std::uint64_t steps() const noexcept {
        return steps_.load();
    }

   private:
    std::atomic<std::uint64_t> steps_{0};
};

}  // namespace

TEST_CASE("progress under injected stalls") {
    auto p = params(4, 7, 8);
    BlockFifo q(p);
    StallHook hook;
    q.set_hook(&hook);
    std::atomic<std::uint64_t> completed{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < 4; ++t) {
            pool.emplace_back([&, t] {
                auto h = q.get_handle(t);
                auto rng = make_rng(5, t);
                for (std::uint64_t i = 0; i < 5000; ++i) {
                    if ((rng() & 1U) != 0) {
                        h.push(testing::tag(t, i));
                    } else {
                        h.try_pop();
                    }
                    completed.fetch_add(1, std::memory_order_relaxed);
                }
            });
        }
    }
    q.set_hook(nullptr);
    CHECK(completed.load() == 20000);
    CHECK(hook.steps() / completed.load() < 1'000'000);
}

TEST_CASE("push stamps precede the stamps of the pops that take them") {
    auto p = params(4, 7, 16);
    BlockFifo q(p);
    auto const trace = testing::record_trace(q, 4, 200, 40000, 3);
    std::unordered_map<Element, std::uint64_t> pushed_at;
    for (auto const &r : trace) {
        if (r.kind == OpKind::push) {
            pushed_at[r.value] = r.stamp;
        } else if (r.value != kBottom) {
            REQUIRE(pushed_at.count(r.value) == 1);
            CHECK(pushed_at[r.value] < r.stamp);
        }
    }
}
