#include "peergrade/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "peergrade/error.hpp"

namespace peergrade {

namespace {

    // Relative slack used to decide that a cumulative weight sits exactly on
    // half of the total. Partial sums of identical weights are not exact in
    // binary floating point.
    constexpr double kHalfTolerance = 1e-12;

    void check_grade(double value)
    {
        if (!std::isfinite(value) || value < kMinGrade || value > kMaxGrade) {
            throw Error(ErrorCode::InvalidGrade, "grade " + std::to_string(value) + " outside [0, 10]");
        }
    }

    struct Observation {
        double grade;
        double weight;
        std::size_t index;
    };

    // Pairs grades with weights and drops zero-weight observations.
    std::vector<Observation> retained(const GradeSample& sample, const WeightVector& weights)
    {
        if (sample.size() != weights.size()) {
            throw Error(ErrorCode::LengthMismatch,
                        std::to_string(sample.size()) + " grades vs " + std::to_string(weights.size()) + " weights");
        }
        std::vector<Observation> out;
        out.reserve(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) {
            if (weights[i] > 0.0) {
                out.push_back({ sample[i], weights[i], i });
            }
        }
        if (out.empty()) {
            throw Error(ErrorCode::AllZeroWeights, "no observation carries positive weight");
        }
        return out;
    }

    // Aggregates of identical values are returned verbatim, and every other
    // result is clamped into the observed range so the bounds invariant holds
    // bit-for-bit.
    template <typename Range, typename Proj>
    std::pair<double, double> range_of(const Range& r, Proj proj)
    {
        auto [lo, hi] = std::minmax_element(r.begin(), r.end(),
                                            [&](const auto& a, const auto& b) { return proj(a) < proj(b); });
        return { proj(*lo), proj(*hi) };
    }

    double bounded(double value, std::pair<double, double> range)
    {
        return std::clamp(value, range.first, range.second);
    }

    constexpr auto kGradeOf = [](const Observation& o) { return o.grade; };
    constexpr auto kIdentity = [](double x) { return x; };

} // namespace

Grade::Grade(double value)
    : value_(value)
{
    check_grade(value);
}

GradeSample::GradeSample(std::initializer_list<double> values)
    : GradeSample(std::vector<double>(values))
{
}

GradeSample::GradeSample(std::vector<double> values)
    : values_(std::move(values))
{
    if (values_.empty()) {
        throw Error(ErrorCode::EmptySample, "a grade sample needs at least one observation");
    }
    std::for_each(values_.begin(), values_.end(), check_grade);
}

GradeSample::GradeSample(std::span<const Grade> grades)
{
    values_.reserve(grades.size());
    for (const auto& g : grades) {
        values_.push_back(g.value());
    }
    if (values_.empty()) {
        throw Error(ErrorCode::EmptySample, "a grade sample needs at least one observation");
    }
}

double GradeSample::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GradeSample::max() const { return *std::max_element(values_.begin(), values_.end()); }

WeightVector::WeightVector(std::initializer_list<double> weights)
    : WeightVector(std::vector<double>(weights))
{
}

WeightVector::WeightVector(std::vector<double> weights)
    : weights_(std::move(weights))
{
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw Error(ErrorCode::InvalidWeight, "weight " + std::to_string(w) + " is not a finite non-negative number");
        }
    }
}

WeightVector WeightVector::uniform(std::size_t n, double value)
{
    return WeightVector(std::vector<double>(n, value));
}

double WeightVector::total() const noexcept
{
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool WeightVector::all_zero() const noexcept
{
    return std::none_of(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; });
}

std::string_view to_string(AggregationMethod method) noexcept
{
    switch (method) {
    case AggregationMethod::ArithmeticMean: return "ARITHMETIC_MEAN";
    case AggregationMethod::GeometricMean: return "GEOMETRIC_MEAN";
    case AggregationMethod::HarmonicMean: return "HARMONIC_MEAN";
    case AggregationMethod::Median: return "MEDIAN";
    }
    return "UNKNOWN";
}

std::optional<AggregationMethod> parse_method(std::string_view name)
{
    for (auto m : kAllMethods) {
        if (name == to_string(m)) {
            return m;
        }
    }
    if (name == "AM") return AggregationMethod::ArithmeticMean;
    if (name == "GM") return AggregationMethod::GeometricMean;
    if (name == "HM") return AggregationMethod::HarmonicMean;
    if (name == "MD") return AggregationMethod::Median;
    return std::nullopt;
}

std::string_view to_string(AggregateFlag flag) noexcept
{
    switch (flag) {
    case AggregateFlag::ZeroWeightsDiscarded: return "ZERO_WEIGHTS_DISCARDED";
    case AggregateFlag::UnweightedFallback: return "UNWEIGHTED_FALLBACK";
    }
    return "UNKNOWN";
}

double arithmetic_mean(const GradeSample& sample)
{
    const auto values = sample.values();
    const auto range = range_of(values, kIdentity);
    if (range.first == range.second) {
        return range.first;
    }
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    return bounded(sum / static_cast<double>(values.size()), range);
}

double geometric_mean(const GradeSample& sample)
{
    const auto values = sample.values();
    const auto range = range_of(values, kIdentity);
    if (range.first == 0.0) {
        return 0.0;
    }
    if (range.first == range.second) {
        return range.first;
    }
    double log_sum = 0.0;
    for (double x : values) {
        log_sum += std::log(x);
    }
    return bounded(std::exp(log_sum / static_cast<double>(values.size())), range);
}

double harmonic_mean(const GradeSample& sample)
{
    const auto values = sample.values();
    const auto range = range_of(values, kIdentity);
    if (range.first == 0.0) {
        throw Error(ErrorCode::ZeroObservation, "harmonic mean of a sample containing 0");
    }
    if (range.first == range.second) {
        return range.first;
    }
    double reciprocal_sum = 0.0;
    for (double x : values) {
        reciprocal_sum += 1.0 / x;
    }
    return bounded(static_cast<double>(values.size()) / reciprocal_sum, range);
}

double median(const GradeSample& sample)
{
    std::vector<double> sorted(sample.values().begin(), sample.values().end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) {
        return sorted[n / 2];
    }
    return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

double weighted_arithmetic_mean(const GradeSample& sample, const WeightVector& weights)
{
    const auto obs = retained(sample, weights);
    const auto range = range_of(obs, kGradeOf);
    if (range.first == range.second) {
        return range.first;
    }
    double weighted_sum = 0.0;
    double total = 0.0;
    for (const auto& o : obs) {
        weighted_sum += o.weight * o.grade;
        total += o.weight;
    }
    return bounded(weighted_sum / total, range);
}

double weighted_geometric_mean(const GradeSample& sample, const WeightVector& weights)
{
    const auto obs = retained(sample, weights);
    const auto range = range_of(obs, kGradeOf);
    if (range.first == 0.0) {
        return 0.0;
    }
    if (range.first == range.second) {
        return range.first;
    }
    double log_sum = 0.0;
    double total = 0.0;
    for (const auto& o : obs) {
        log_sum += o.weight * std::log(o.grade);
        total += o.weight;
    }
    return bounded(std::exp(log_sum / total), range);
}

double weighted_harmonic_mean(const GradeSample& sample, const WeightVector& weights)
{
    const auto obs = retained(sample, weights);
    const auto range = range_of(obs, kGradeOf);
    if (range.first == 0.0) {
        throw Error(ErrorCode::ZeroObservation, "weighted harmonic mean with positive weight on a 0 grade");
    }
    if (range.first == range.second) {
        return range.first;
    }
    double reciprocal_sum = 0.0;
    double total = 0.0;
    for (const auto& o : obs) {
        reciprocal_sum += o.weight / o.grade;
        total += o.weight;
    }
    return bounded(total / reciprocal_sum, range);
}

double weighted_median(const GradeSample& sample, const WeightVector& weights)
{
    auto obs = retained(sample, weights);
    std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
        return a.grade < b.grade || (a.grade == b.grade && a.index < b.index);
    });
    double total = 0.0;
    for (const auto& o : obs) {
        total += o.weight;
    }
    double cumulative = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        cumulative += obs[k].weight;
        const double excess = 2.0 * cumulative - total;
        if (std::abs(excess) <= kHalfTolerance * total && k + 1 < obs.size()) {
            return (obs[k].grade + obs[k + 1].grade) / 2.0;
        }
        if (excess > 0.0) {
            return obs[k].grade;
        }
    }
    return obs.back().grade;
}

double aggregate_unweighted(const GradeSample& sample, AggregationMethod method)
{
    switch (method) {
    case AggregationMethod::ArithmeticMean: return arithmetic_mean(sample);
    case AggregationMethod::GeometricMean: return geometric_mean(sample);
    case AggregationMethod::HarmonicMean: return harmonic_mean(sample);
    case AggregationMethod::Median: return median(sample);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown aggregation method");
}

double aggregate_weighted(const GradeSample& sample, const WeightVector& weights, AggregationMethod method)
{
    switch (method) {
    case AggregationMethod::ArithmeticMean: return weighted_arithmetic_mean(sample, weights);
    case AggregationMethod::GeometricMean: return weighted_geometric_mean(sample, weights);
    case AggregationMethod::HarmonicMean: return weighted_harmonic_mean(sample, weights);
    case AggregationMethod::Median: return weighted_median(sample, weights);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown aggregation method");
}

AggregateResult aggregate(const GradeSample& sample, AggregationMethod method,
                          const std::optional<WeightVector>& weights)
{
    AggregateResult result;
    result.method = method;
    if (!weights) {
        result.value = aggregate_unweighted(sample, method);
        return result;
    }
    if (weights->size() != sample.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(sample.size()) + " grades vs " + std::to_string(weights->size()) + " weights");
    }
    if (weights->all_zero()) {
        result.value = aggregate_unweighted(sample, method);
        result.diagnostics.push_back(AggregateFlag::UnweightedFallback);
        return result;
    }
    result.weighted = true;
    const auto w = weights->values();
    if (std::any_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
        result.diagnostics.push_back(AggregateFlag::ZeroWeightsDiscarded);
    }
    result.value = aggregate_weighted(sample, *weights, method);
    return result;
}

} // namespace peergrade
