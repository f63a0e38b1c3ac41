#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "peergrade/aggregation.hpp"
#include "peergrade/error.hpp"
#include "support/oracles.hpp"

using namespace peergrade;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

double unweighted(AggregationMethod m, const std::vector<double>& x)
{
    return aggregate_unweighted(GradeSample(x), m);
}

double weighted(AggregationMethod m, const std::vector<double>& x, const std::vector<double>& w)
{
    return aggregate_weighted(GradeSample(x), WeightVector(w), m);
}

} // namespace

TEST_CASE("arithmetic mean")
{
    CHECK(arithmetic_mean({ 2, 4, 6 }) == 4.0);
    CHECK(arithmetic_mean({ 7.5 }) == 7.5);
    CHECK(arithmetic_mean({ 2.1, 3.3, 7.2 }) == doctest::Approx(4.2).epsilon(1e-14));
}

TEST_CASE("geometric mean")
{
    CHECK(geometric_mean({ 5, 5, 5 }) == 5.0);
    CHECK(geometric_mean({ 0, 8 }) == 0.0);
    CHECK(geometric_mean({ 4, 9 }) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("harmonic mean")
{
    CHECK(harmonic_mean({ 5, 5, 5 }) == 5.0);
    CHECK(harmonic_mean({ 2, 6 }) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(code_of([] { (void)harmonic_mean({ 4, 0 }); }) == ErrorCode::ZeroObservation);
}

TEST_CASE("median")
{
    CHECK(median({ 3, 9, 5 }) == 5.0);
    CHECK(median({ 2, 4, 6, 8 }) == 5.0);
    CHECK(median({ 7 }) == 7.0);
}

TEST_CASE("weighted arithmetic mean")
{
    CHECK(weighted_arithmetic_mean({ 2, 10 }, { 1, 3 }) == 8.0);
    CHECK(weighted_arithmetic_mean({ 2, 4, 6 }, { 0.5, 0.5, 0.5 }) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(weighted_arithmetic_mean({ 3, 9 }, { 1, 0 }) == 3.0);
}

TEST_CASE("weighted geometric mean")
{
    CHECK(weighted_geometric_mean({ 2, 8 }, { 1, 1 }) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(weighted_geometric_mean({ 2, 8 }, { 3, 1 }) == doctest::Approx(std::pow(64.0, 0.25)).epsilon(1e-14));
    CHECK(weighted_geometric_mean({ 5, 5, 5 }, { 0.2, 0.3, 0.5 }) == 5.0);
    CHECK(weighted_geometric_mean({ 0, 8 }, { 1, 1 }) == 0.0);
    CHECK(weighted_geometric_mean({ 0, 8 }, { 0, 1 }) == 8.0);
}

TEST_CASE("weighted harmonic mean")
{
    CHECK(weighted_harmonic_mean({ 2, 6 }, { 1, 1 }) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(weighted_harmonic_mean({ 2, 6 }, { 1, 3 }) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(weighted_harmonic_mean({ 5, 5 }, { 7, 0.1 }) == 5.0);
    CHECK(weighted_harmonic_mean({ 0, 6 }, { 0, 2 }) == 6.0);
    CHECK(code_of([] { (void)weighted_harmonic_mean({ 0, 6 }, { 1, 2 }); }) == ErrorCode::ZeroObservation);
}

TEST_CASE("weighted median")
{
    CHECK(weighted_median({ 1, 2, 3 }, { 1, 1, 4 }) == 3.0);
    CHECK(weighted_median({ 1, 3 }, { 1, 1 }) == 2.0);
    CHECK(weighted_median({ 0.5, 7 }, { 0, 1 }) == 7.0);
    CHECK(weighted_median({ 4 }, { 0.3 }) == 4.0);
    SUBCASE("repeated tenths still hit the exact half")
    {
        CHECK(weighted_median({ 1, 2, 3, 4, 5, 6 }, { 0.1, 0.1, 0.1, 0.1, 0.1, 0.1 }) == 3.5);
    }
}

TEST_CASE("aggregate dispatch")
{
    auto plain = aggregate({ 2, 4, 6 }, AggregationMethod::Median);
    CHECK(plain.value == 4.0);
    CHECK_FALSE(plain.weighted);
    CHECK(plain.diagnostics.empty());

    auto w = aggregate({ 2, 10 }, AggregationMethod::ArithmeticMean, WeightVector{ 1, 3 });
    CHECK(w.value == 8.0);
    CHECK(w.weighted);

    auto fallback = aggregate({ 2, 10 }, AggregationMethod::Median, WeightVector{ 0, 0 });
    CHECK(fallback.value == 6.0);
    CHECK_FALSE(fallback.weighted);
    REQUIRE(fallback.diagnostics.size() == 1);
    CHECK(fallback.diagnostics[0] == AggregateFlag::UnweightedFallback);

    auto partial = aggregate({ 2, 10 }, AggregationMethod::Median, WeightVector{ 0, 1 });
    CHECK(partial.value == 10.0);
    CHECK(partial.diagnostics == std::vector{ AggregateFlag::ZeroWeightsDiscarded });
}

TEST_CASE("method names")
{
    for (auto m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK(parse_method("MD") == AggregationMethod::Median);
    CHECK_FALSE(parse_method("mode").has_value());
}

TEST_CASE("error paths")
{
    CHECK(code_of([] { GradeSample s(std::vector<double>{}); }) == ErrorCode::EmptySample);
    CHECK(code_of([] { GradeSample s{ 10.5 }; }) == ErrorCode::InvalidGrade);
    CHECK(code_of([] { GradeSample s{ -0.1 }; }) == ErrorCode::InvalidGrade);
    CHECK(code_of([] { WeightVector w{ -1.0 }; }) == ErrorCode::InvalidWeight);
    CHECK(code_of([] { WeightVector w{ std::nan("") }; }) == ErrorCode::InvalidWeight);
    CHECK(code_of([] { (void)weighted_median({ 1, 2 }, { 1 }); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { (void)weighted_arithmetic_mean({ 1, 2 }, { 0, 0 }); }) == ErrorCode::AllZeroWeights);
    CHECK(code_of([] { (void)aggregate({ 1, 2 }, AggregationMethod::Median, WeightVector{ 1 }); })
          == ErrorCode::LengthMismatch);
}

TEST_CASE("oracle equivalence on random instances")
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = gen::between(rng, 1, 10);
        const auto x = gen::grades(rng, n);
        const auto w = gen::weights(rng, n);
        CAPTURE(trial);
        CHECK(gen::close_rel(unweighted(AggregationMethod::ArithmeticMean, x), oracle::arithmetic_mean(x), 1e-9));
        CHECK(gen::close_rel(unweighted(AggregationMethod::GeometricMean, x), oracle::geometric_mean(x), 1e-9));
        CHECK(gen::close_rel(unweighted(AggregationMethod::HarmonicMean, x), oracle::harmonic_mean(x), 1e-9));
        CHECK(unweighted(AggregationMethod::Median, x) == oracle::median(x));
        CHECK(gen::close_rel(weighted(AggregationMethod::ArithmeticMean, x, w),
                             oracle::weighted_arithmetic_mean(x, w), 1e-9));
        CHECK(gen::close_rel(weighted(AggregationMethod::GeometricMean, x, w),
                             oracle::weighted_geometric_mean(x, w), 1e-9));
        CHECK(gen::close_rel(weighted(AggregationMethod::HarmonicMean, x, w),
                             oracle::weighted_harmonic_mean(x, w), 1e-9));
        CHECK(weighted(AggregationMethod::Median, x, w) == oracle::weighted_median(x, w));
    }
}

TEST_CASE("mean inequality and bounds")
{
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 5000; ++trial) {
        const auto x = gen::grades(rng, gen::between(rng, 1, 12));
        const auto w = gen::weights(rng, x.size());
        const double am = unweighted(AggregationMethod::ArithmeticMean, x);
        const double gm = unweighted(AggregationMethod::GeometricMean, x);
        const double hm = unweighted(AggregationMethod::HarmonicMean, x);
        CHECK(hm <= gm + 1e-12);
        CHECK(gm <= am + 1e-12);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        for (auto m : kAllMethods) {
            for (double v : { unweighted(m, x), weighted(m, x, w) }) {
                CHECK(v >= *lo);
                CHECK(v <= *hi);
            }
        }
    }
}

TEST_CASE("equal weights, weight scale and permutation")
{
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = gen::between(rng, 1, 10);
        auto x = gen::grades(rng, n);
        auto w = gen::weights(rng, n);
        const double c = gen::uniform(rng, 0.01, 100.0);
        std::vector<double> scaled(w);
        for (auto& v : scaled) v *= c;
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> px(n), pw(n);
        for (std::size_t i = 0; i < n; ++i) {
            px[i] = x[perm[i]];
            pw[i] = w[perm[i]];
        }
        for (auto m : kAllMethods) {
            CAPTURE(to_string(m));
            CHECK(gen::close_rel(weighted(m, x, std::vector<double>(n, c)), unweighted(m, x), 1e-12));
            CHECK(gen::close_rel(weighted(m, x, scaled), weighted(m, x, w), 1e-12));
            CHECK(gen::close_rel(weighted(m, px, pw), weighted(m, x, w), 1e-12));
            CHECK(gen::close_rel(unweighted(m, px), unweighted(m, x), 1e-12));
        }
    }
}

TEST_CASE("zero weights are discarded")
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = gen::between(rng, 2, 10);
        auto x = gen::grades(rng, n);
        auto w = gen::weights(rng, n);
        std::vector<double> kept_x, kept_w;
        for (std::size_t i = 0; i < n; ++i) {
            if (gen::uniform(rng, 0, 1) < 0.3) w[i] = 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] > 0.0) {
                kept_x.push_back(x[i]);
                kept_w.push_back(w[i]);
            }
        }
        if (kept_x.empty()) continue;
        for (auto m : kAllMethods) {
            CHECK(gen::close_rel(weighted(m, x, w), weighted(m, kept_x, kept_w), 1e-12));
        }
    }
}

TEST_CASE("monotone in each grade")
{
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = gen::between(rng, 1, 10);
        auto x = gen::grades(rng, n);
        std::vector<double> w(n);
        for (auto& v : w) v = gen::uniform(rng, 0.05, 1.0);
        auto bumped = x;
        const auto i = gen::between(rng, 0, n - 1);
        bumped[i] = std::min(10.0, bumped[i] + gen::uniform(rng, 0.0, 3.0));
        for (auto m : kAllMethods) {
            CHECK(unweighted(m, bumped) >= unweighted(m, x) - 1e-12);
            CHECK(weighted(m, bumped, w) >= weighted(m, x, w) - 1e-12);
        }
    }
}
