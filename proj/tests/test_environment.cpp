#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "alp/environment.hpp"
#include "alp/parallel.hpp"

using namespace alp;

TEST_CASE("solve probability closed form") {
    const EnvConfig env;
    for (double d : {0.0, 0.3, 1.0}) CHECK(solve_probability(d, 0, env) == 0.0);
    CHECK(solve_probability(0.0, 1e7, env) == doctest::Approx(1.0).epsilon(1e-15));
    // 0.4 * (1 - e^-1), 30-digit reference value.
    CHECK(std::abs(solve_probability(1.0, length_scale(1.0, env), env) -
                   0.252848223531423071361790491935) < 1e-15);
    CHECK(length_scale(0.0, env) == 64.0);
    CHECK(accuracy_ceiling(1.0, env) == doctest::Approx(0.4));
    CHECK_THROWS(solve_probability(-0.01, 10, env));
    CHECK_THROWS(solve_probability(1.01, 10, env));
}

TEST_CASE("solve probability monotone in length and difficulty") {
    const EnvConfig env;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::uniform_int_distribution<int> ul(0, 20000);
    for (int i = 0; i < 10000; ++i) {
        const double d1 = ud(rng), d2 = ud(rng);
        int l1 = ul(rng), l2 = ul(rng);
        if (l1 > l2) std::swap(l1, l2);
        REQUIRE(solve_probability(d1, l1, env) <= solve_probability(d1, l2, env));
        REQUIRE(solve_probability(std::max(d1, d2), l1, env) <=
                solve_probability(std::min(d1, d2), l1, env));
        const double p = solve_probability(d1, l1, env);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
    }
}

TEST_CASE("sample task pools") {
    EnvConfig env;
    env.mixture_hard_fraction = 0.0;
    for (TaskId i = 0; i < 2000; ++i) {
        auto s = RandomStream::derive(1, StreamTag::eval_task, {i});
        const Task t = sample_task(env, s, i);
        REQUIRE(t.pool == TaskPool::easy_pool);
        REQUIRE(t.difficulty >= kEasyPoolLo);
        REQUIRE(t.difficulty <= kEasyPoolHi);
        REQUIRE(t.feature >= 0.0);
        REQUIRE(t.feature <= 1.0);
        REQUIRE(t.id == i);
    }
    env.mixture_hard_fraction = 1.0;
    for (TaskId i = 0; i < 2000; ++i) {
        auto s = RandomStream::derive(1, StreamTag::eval_task, {i});
        const Task t = sample_task(env, s, i);
        REQUIRE(t.pool == TaskPool::hard_pool);
        REQUIRE(t.difficulty >= kHardPoolLo);
        REQUIRE(t.difficulty <= kHardPoolHi);
    }
    env.mixture_hard_fraction = 0.5;
    const int n = 100000;
    int hard = 0;
    double noise_sq = 0.0;
    int unclamped = 0;
    for (int i = 0; i < n; ++i) {
        auto s = RandomStream::derive(3, StreamTag::train_task, {static_cast<std::uint64_t>(i)});
        const Task t = sample_task(env, s);
        hard += t.pool == TaskPool::hard_pool;
        if (t.feature > 0.0 && t.feature < 1.0) {
            noise_sq += (t.feature - t.difficulty) * (t.feature - t.difficulty);
            ++unclamped;
        }
    }
    const double sd = std::sqrt(n * 0.25);
    CHECK(std::abs(hard - n * 0.5) < 3.0 * sd);
    CHECK(std::sqrt(noise_sq / unclamped) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("resolve frequencies") {
    const EnvConfig env;
    Task zero{0, 0.0, 0.0, TaskPool::easy_pool};
    auto s = RandomStream::derive(9, StreamTag::eval_rollout, {0});
    for (int i = 0; i < 1000; ++i) REQUIRE_FALSE(resolve(zero, 0, env, s));

    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += resolve(zero, 4096, env, s);
    const double p0 = solve_probability(0.0, 4096, env);
    CHECK(std::abs(hits / 1e4 - p0) <= 3.0 * std::sqrt(p0 * (1 - p0) / 1e4) + 1e-12);
    CHECK(hits >= 9990);

    for (double d : {0.2, 0.55, 0.9}) {
        Task t{1, d, d, TaskPool::hard_pool};
        for (int len : {32, 256, 2048}) {
            const double p = solve_probability(d, len, env);
            int k = 0;
            auto st = RandomStream::derive(17, StreamTag::train_rollout,
                                           {static_cast<std::uint64_t>(len)});
            for (int i = 0; i < 10000; ++i) k += resolve(t, len, env, st);
            CHECK(std::abs(k / 1e4 - p) <= 3.0 * std::sqrt(p * (1 - p) / 1e4));
        }
    }

    auto a = RandomStream::derive(4, StreamTag::train_rollout, {7, 1});
    auto b = RandomStream::derive(4, StreamTag::train_rollout, {7, 1});
    Task t{7, 0.7, 0.7, TaskPool::hard_pool};
    for (int i = 0; i < 100; ++i) REQUIRE(resolve(t, 512, env, a) == resolve(t, 512, env, b));
}

TEST_CASE("streams are keyed by coordinates not by order") {
    const EnvConfig env;
    const std::size_t n = 257;
    std::vector<Task> forward(n), threaded(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = RandomStream::derive(42, StreamTag::train_task, {i});
        forward[i] = sample_task(env, s, i);
    }
    for (int workers : {2, 8}) {
        parallel_for(n, workers, [&](std::size_t j) {
            const std::size_t i = n - 1 - j;
            auto s = RandomStream::derive(42, StreamTag::train_task, {i});
            threaded[i] = sample_task(env, s, i);
        });
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(threaded[i].difficulty == forward[i].difficulty);
            REQUIRE(threaded[i].feature == forward[i].feature);
            REQUIRE(threaded[i].pool == forward[i].pool);
        }
    }
    auto x = RandomStream::derive(42, StreamTag::train_task, {0});
    auto y = RandomStream::derive(42, StreamTag::eval_task, {0});
    auto z = RandomStream::derive(43, StreamTag::train_task, {0});
    const auto xv = x();
    CHECK(xv != y());
    CHECK(xv != z());
}

TEST_CASE("env config validation") {
    EnvConfig env;
    CHECK_NOTHROW(env.validate());
    env.mixture_hard_fraction = 1.2;
    CHECK_THROWS(env.validate());
    env.mixture_hard_fraction = 0.5;
    env.length_scale_base = 0.0;
    CHECK_THROWS(env.validate());
}
