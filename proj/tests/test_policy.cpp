#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "alp/policy.hpp"

using namespace alp;

namespace {

PolicyParams random_params(std::mt19937_64& rng, double scale = 2.0) {
    PolicyParams p = PolicyParams::zeros();
    std::normal_distribution<double> nd(0.0, scale);
    for (double& w : p.weights.flat()) w = nd(rng);
    return p;
}

double log_prob_of(const PolicyParams& p, double x, std::size_t bin) {
    return log_bin_distribution(p, x)[bin];
}

}  // namespace

TEST_CASE("feature basis") {
    CHECK(features(0.0) == std::vector<double>{1, 0, 0});
    CHECK(features(1.0) == std::vector<double>{1, 1, 1});
    CHECK(features(0.5) == std::vector<double>{1, 0.5, 0.25});
    CHECK(features(0.5, 4).size() == 4);
}

TEST_CASE("bin distribution") {
    const auto uniform = bin_distribution(PolicyParams::zeros(), 0.3);
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-15));

    PolicyParams sat = PolicyParams::zeros();
    sat.weights(5, 0) = 1000.0;
    const auto ps = bin_distribution(sat, 0.0);
    CHECK(std::abs(ps[5] - 1.0) < 1e-12);
    for (double p : ps) CHECK(std::isfinite(p));
    const auto lps = log_bin_distribution(sat, 0.0);
    CHECK(lps[0] == doctest::Approx(-1000.0));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto params = random_params(rng, 3.0);
        const double x = ux(rng);
        const auto phi = features(x);
        std::vector<long double> logits(params.num_bins());
        long double z = 0;
        for (std::size_t b = 0; b < logits.size(); ++b) {
            for (std::size_t f = 0; f < phi.size(); ++f)
                logits[b] += static_cast<long double>(params.weights(b, f)) * phi[f];
            z += std::exp(logits[b]);
        }
        const auto got = bin_distribution(params, x);
        double sum = 0;
        for (std::size_t b = 0; b < got.size(); ++b) {
            REQUIRE(std::abs(got[b] - static_cast<double>(std::exp(logits[b]) / z)) < 1e-12);
            sum += got[b];
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }

    PolicyParams bad = PolicyParams::zeros();
    bad.weights(0, 0) = std::nan("");
    CHECK_THROWS(bin_distribution(bad, 0.5));
}

TEST_CASE("sampling lengths") {
    PolicyParams sat = PolicyParams::zeros();
    sat.weights(2, 0) = 1000.0;
    auto s = RandomStream::derive(1, StreamTag::train_rollout, {0});
    for (int i = 0; i < 1000; ++i) {
        const auto c = sample_length(sat, 0.4, s);
        REQUIRE(c.bin_index == 2);
        REQUIRE(c.log_prob <= 0.0);
    }

    const PolicyParams uni = PolicyParams::zeros();
    std::vector<int> counts(8, 0);
    const int n = 100000;
    auto su = RandomStream::derive(2, StreamTag::train_rollout, {0});
    for (int i = 0; i < n; ++i) {
        const auto c = sample_length(uni, 0.5, su);
        ++counts[c.bin_index];
        REQUIRE(c.log_prob == doctest::Approx(std::log(1.0 / 8)));
    }
    const double sd = std::sqrt(n * (1.0 / 8) * (7.0 / 8));
    for (int c : counts) CHECK(std::abs(c - n / 8.0) < 3.0 * sd);

    std::mt19937_64 rng(8);
    const auto params = random_params(rng);
    auto a = RandomStream::derive(5, StreamTag::eval_rollout, {1, 2});
    auto b = RandomStream::derive(5, StreamTag::eval_rollout, {1, 2});
    for (int i = 0; i < 100; ++i) {
        const auto ca = sample_length(params, 0.7, a);
        const auto cb = sample_length(params, 0.7, b);
        REQUIRE(ca.bin_index == cb.bin_index);
        REQUIRE(ca.log_prob == cb.log_prob);
        REQUIRE(ca.log_prob == log_prob_of(params, 0.7, ca.bin_index));
    }
}

TEST_CASE("score gradient symmetry example") {
    PolicyParams p = PolicyParams::zeros({100, 200}, 3);
    const double x = 0.4;
    const auto phi = features(x);
    const Matrix g = grad_log_prob(p, x, 0);
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(g(0, f) == doctest::Approx(0.5 * phi[f]));
        CHECK(g(1, f) == doctest::Approx(-0.5 * phi[f]));
    }
}

TEST_CASE("score gradient matches central finite differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> ub(0, 7);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto params = random_params(rng, 1.5);
        const double x = ux(rng);
        const std::size_t bin = ub(rng);
        const Matrix g = grad_log_prob(params, x, bin);
        double diff_sq = 0.0, norm_sq = 0.0;
        for (std::size_t r = 0; r < params.num_bins(); ++r) {
            for (std::size_t c = 0; c < params.feature_dim(); ++c) {
                PolicyParams up = params, down = params;
                up.weights(r, c) += h;
                down.weights(r, c) -= h;
                const double fd = (log_prob_of(up, x, bin) - log_prob_of(down, x, bin)) / (2 * h);
                diff_sq += (fd - g(r, c)) * (fd - g(r, c));
                norm_sq += g(r, c) * g(r, c);
            }
        }
        worst = std::max(worst, std::sqrt(diff_sq / norm_sq));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("score function identities") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto params = random_params(rng);
        const double x = ux(rng);
        const auto probs = bin_distribution(params, x);
        Matrix expect(params.num_bins(), params.feature_dim());
        for (std::size_t b = 0; b < params.num_bins(); ++b) {
            const Matrix g = grad_log_prob(params, x, b);
            for (std::size_t c = 0; c < params.feature_dim(); ++c) {
                double col = 0.0;
                for (std::size_t r = 0; r < params.num_bins(); ++r) col += g(r, c);
                REQUIRE(std::abs(col) < 1e-12);
            }
            Matrix scaled = g;
            scaled *= probs[b];
            expect += scaled;
        }
        for (double v : expect.flat()) REQUIRE(std::abs(v) < 1e-10);
    }
}

TEST_CASE("nearest bin and forced policy") {
    const auto& bins = kDefaultBins;
    CHECK(nearest_bin(bins, 2048) == 6);
    CHECK(nearest_bin(bins, 48) == 0);  // tie between 32 and 64
    CHECK(nearest_bin(bins, 1) == 0);
    CHECK(nearest_bin(bins, 1e9) == 7);
    CHECK(nearest_bin(bins, 700) == 4);

    FrozenPolicy fp{PolicyParams::zeros(), 6};
    auto s = RandomStream::derive(1, StreamTag::eval_rollout, {0});
    for (int i = 0; i < 50; ++i) {
        const auto c = fp.draw(0.3, s);
        REQUIRE(c.bin_index == 6);
        REQUIRE(c.log_prob == 0.0);
    }
}

TEST_CASE("params validation") {
    CHECK_NOTHROW(PolicyParams::zeros().validate());
    CHECK_THROWS(PolicyParams::zeros({64, 32}, 3));
    CHECK_THROWS(PolicyParams::zeros({0, 32}, 3));
    PolicyParams p = PolicyParams::zeros();
    p.bins.pop_back();
    CHECK_THROWS(p.validate());
}
