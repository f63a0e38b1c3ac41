#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace peergrade {

inline constexpr double kMinGrade = 0.0;
inline constexpr double kMaxGrade = 10.0;

/// A rescaled rubric score on the 0-10 scale.
class Grade {
public:
    explicit Grade(double value);

    [[nodiscard]] double value() const noexcept { return value_; }
    friend bool operator==(Grade, Grade) = default;

private:
    double value_;
};

/// Ordered, non-empty list of grades. Index i identifies the i-th rater.
class GradeSample {
public:
    GradeSample(std::initializer_list<double> values);
    explicit GradeSample(std::vector<double> values);
    explicit GradeSample(std::span<const Grade> grades);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;

private:
    std::vector<double> values_;
};

/// Non-negative, finite weights aligned index-by-index with a GradeSample.
/// An all-zero vector is representable; aggregators reject it.
class WeightVector {
public:
    WeightVector(std::initializer_list<double> weights);
    explicit WeightVector(std::vector<double> weights);

    [[nodiscard]] static WeightVector uniform(std::size_t n, double value = 1.0);

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return weights_; }
    [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
    [[nodiscard]] double total() const noexcept;
    [[nodiscard]] bool all_zero() const noexcept;

private:
    std::vector<double> weights_;
};

enum class AggregationMethod { ArithmeticMean, GeometricMean, HarmonicMean, Median };

inline constexpr AggregationMethod kAllMethods[] = {
    AggregationMethod::ArithmeticMean,
    AggregationMethod::GeometricMean,
    AggregationMethod::HarmonicMean,
    AggregationMethod::Median,
};

[[nodiscard]] std::string_view to_string(AggregationMethod method) noexcept;
/// Accepts the canonical names (ARITHMETIC_MEAN, ...) and the short forms AM, GM, HM, MD.
[[nodiscard]] std::optional<AggregationMethod> parse_method(std::string_view name);

enum class AggregateFlag { ZeroWeightsDiscarded, UnweightedFallback };

[[nodiscard]] std::string_view to_string(AggregateFlag flag) noexcept;

struct AggregateResult {
    double value = 0.0;
    AggregationMethod method = AggregationMethod::ArithmeticMean;
    bool weighted = false;
    std::vector<AggregateFlag> diagnostics;
};

// Unweighted aggregators. Each throws EMPTY_SAMPLE only through GradeSample
// construction, so all of them accept any sample.
[[nodiscard]] double arithmetic_mean(const GradeSample& sample);
/// Exactly 0 if any grade is 0.
[[nodiscard]] double geometric_mean(const GradeSample& sample);
/// Throws ZERO_OBSERVATION if any grade is 0.
[[nodiscard]] double harmonic_mean(const GradeSample& sample);
[[nodiscard]] double median(const GradeSample& sample);

// Weighted aggregators. Observations with zero weight are discarded before
// evaluation. They throw LENGTH_MISMATCH when the sizes differ and
// ALL_ZERO_WEIGHTS when no weight is positive.
[[nodiscard]] double weighted_arithmetic_mean(const GradeSample& sample, const WeightVector& weights);
[[nodiscard]] double weighted_geometric_mean(const GradeSample& sample, const WeightVector& weights);
/// Throws ZERO_OBSERVATION if a zero grade carries positive weight.
[[nodiscard]] double weighted_harmonic_mean(const GradeSample& sample, const WeightVector& weights);

/**
 * Lower weighted median with midpoint averaging.
 *
 * Retained observations are sorted by grade (ties by original index). With
 * T the retained weight total, the result is the first grade whose
 * cumulative weight exceeds T/2; when the cumulative weight lands exactly on
 * T/2 the result is the midpoint of that grade and the next one. Equal
 * weights reproduce the ordinary median.
 */
[[nodiscard]] double weighted_median(const GradeSample& sample, const WeightVector& weights);

[[nodiscard]] double aggregate_unweighted(const GradeSample& sample, AggregationMethod method);
[[nodiscard]] double aggregate_weighted(const GradeSample& sample, const WeightVector& weights,
                                        AggregationMethod method);

/// Dispatch over the eight functions. An all-zero weight vector falls back to
/// the unweighted function and flags UNWEIGHTED_FALLBACK instead of throwing.
[[nodiscard]] AggregateResult aggregate(const GradeSample& sample, AggregationMethod method,
                                        const std::optional<WeightVector>& weights = std::nullopt);

} // namespace peergrade
