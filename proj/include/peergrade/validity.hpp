#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "peergrade/aggregation.hpp"
#include "peergrade/dataset.hpp"
#include "peergrade/weighting.hpp"

namespace peergrade {

/// Pearson product-moment correlation. Throws LENGTH_MISMATCH,
/// TOO_FEW_VALUES (fewer than 3 pairs) or CONSTANT_VECTOR.
[[nodiscard]] double pearson(std::span<const double> x, std::span<const double> y);

struct Significance {
    double t_statistic = 0.0;
    double p_value = 1.0;  // two-tailed, Student t with m - 2 degrees of freedom
    bool degenerate = false; // |r| == 1: t is infinite and p is reported as 0
};

[[nodiscard]] Significance significance(double r, std::size_t m);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation with relative accuracy near 1e-14.
[[nodiscard]] double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed tail probability P(|T| >= |t|) for T ~ Student t(df).
[[nodiscard]] double student_t_two_tailed(double t, double df);

struct DescriptiveStats {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation, n - 1 denominator
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Throws TOO_FEW_VALUES for fewer than two values.
[[nodiscard]] DescriptiveStats descriptive(std::span<const double> values);

struct HistogramBin {
    double lower = 0.0;
    std::size_t count = 0;
};

/// Half-open bins [origin + k w, origin + (k + 1) w) covering the occupied
/// range, empty interior bins included.
[[nodiscard]] std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width,
                                                  double origin = 0.0);

struct FiveNumberSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Quartiles interpolate linearly at fractional index (m - 1) q.
[[nodiscard]] FiveNumberSummary five_number_summary(std::span<const double> values);

struct PlotOptions {
    double bin_width = 0.5;
    double bin_origin = 0.0;
};

struct ValidityCell {
    AggregationMethod method = AggregationMethod::ArithmeticMean;
    WeightScheme scheme = WeightScheme::None;
    double r = 0.0; // NaN when either vector is constant
    Significance sig;
    std::size_t m = 0;
    std::vector<std::string> flags; // CONSTANT_VECTOR, DEGENERATE
    std::vector<double> aggregated; // one per retained essay, dataset order
    DescriptiveStats stats;
    std::vector<HistogramBin> hist;
    FiveNumberSummary box;
    std::size_t fallback_essays = 0;   // essays aggregated under UNWEIGHTED_FALLBACK
    std::size_t missing_records = 0;   // rater slots with no weight record
};

struct ValidityReport {
    std::vector<ValidityCell> cells; // method-major in the requested order
    std::vector<EssayId> essay_ids;
    std::vector<double> instructor;
    DescriptiveStats instructor_stats;
    std::vector<HistogramBin> instructor_hist;
    FiveNumberSummary instructor_box;
    std::map<std::string, std::size_t> diagnostics; // roll-up counts by code

    [[nodiscard]] const ValidityCell& cell(AggregationMethod method, WeightScheme scheme) const;
};

/// Aggregates every retained essay under each (method, scheme) pair and
/// correlates the result with the instructor grades. Throws TOO_FEW_VALUES
/// for fewer than three essays and INVALID_RECORD when an essay lacks an
/// instructor grade. Constant vectors produce flagged NaN cells.
[[nodiscard]] ValidityReport build_validity_report(const ReviewDataset& dataset,
                                                   std::span<const AggregationMethod> methods,
                                                   std::span<const WeightScheme> schemes,
                                                   const WeightOptions& weight_options = {},
                                                   const PlotOptions& plot_options = {});

} // namespace peergrade
