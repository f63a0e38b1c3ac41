#include "peergrade/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "peergrade/error.hpp"

namespace peergrade {

namespace {

    double mean_of(std::span<const double> v)
    {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }

    // Lentz evaluation of the continued fraction for I_x(a, b).
    double beta_continued_fraction(double a, double b, double x)
    {
        constexpr int kMaxIterations = 10000;
        constexpr double kEpsilon = 1e-15;
        constexpr double kTiny = 1e-300;

        const double qab = a + b;
        const double qap = a + 1.0;
        const double qam = a - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x / qap;
        if (std::abs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIterations; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < kEpsilon) {
                break;
            }
        }
        return h;
    }

    // Index k of the bin holding x, corrected for rounding in (x - origin) / w.
    long long bin_index(double x, double width, double origin)
    {
        auto k = static_cast<long long>(std::floor((x - origin) / width));
        while (origin + static_cast<double>(k + 1) * width <= x) ++k;
        while (origin + static_cast<double>(k) * width > x) --k;
        return k;
    }

    double quantile_sorted(std::span<const double> sorted, double q)
    {
        const double position = static_cast<double>(sorted.size() - 1) * q;
        const auto lo = static_cast<std::size_t>(std::floor(position));
        const double fraction = position - static_cast<double>(lo);
        if (fraction == 0.0 || lo + 1 >= sorted.size()) {
            return sorted[lo];
        }
        if (fraction == 0.5) {
            return (sorted[lo] + sorted[lo + 1]) / 2.0;
        }
        return sorted[lo] + fraction * (sorted[lo + 1] - sorted[lo]);
    }

} // namespace

double pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw Error(ErrorCode::LengthMismatch, "paired vectors differ in length");
    }
    if (x.size() < 3) {
        throw Error(ErrorCode::TooFewValues, "correlation needs at least 3 pairs");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(ErrorCode::ConstantVector, "correlation is undefined for a constant vector");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "incomplete beta needs a, b > 0 and x in [0, 1]");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x)
        + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The fraction converges quickly only on one side of the mean.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df)
{
    if (!(df > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "degrees of freedom must be positive");
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

Significance significance(double r, std::size_t m)
{
    if (m < 3) {
        throw Error(ErrorCode::TooFewValues, "significance needs at least 3 pairs");
    }
    if (!(r >= -1.0 && r <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "correlation outside [-1, 1]");
    }
    Significance s;
    if (std::abs(r) == 1.0) {
        s.degenerate = true;
        s.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), r);
        s.p_value = 0.0;
        return s;
    }
    const double df = static_cast<double>(m - 2);
    s.t_statistic = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
    s.p_value = std::clamp(student_t_two_tailed(s.t_statistic, df), 0.0, 1.0);
    return s;
}

DescriptiveStats descriptive(std::span<const double> values)
{
    if (values.size() < 2) {
        throw Error(ErrorCode::TooFewValues, "descriptive statistics need at least 2 values");
    }
    DescriptiveStats s;
    s.count = values.size();
    s.mean = mean_of(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width, double origin)
{
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw Error(ErrorCode::InvalidConfig, "bin width must be positive");
    }
    if (values.empty()) {
        return {};
    }
    std::map<long long, std::size_t> counts;
    for (double v : values) {
        ++counts[bin_index(v, bin_width, origin)];
    }
    const long long first = counts.begin()->first;
    const long long last = counts.rbegin()->first;
    std::vector<HistogramBin> bins;
    bins.reserve(static_cast<std::size_t>(last - first + 1));
    for (long long k = first; k <= last; ++k) {
        auto it = counts.find(k);
        bins.push_back({ origin + static_cast<double>(k) * bin_width, it == counts.end() ? 0 : it->second });
    }
    return bins;
}

FiveNumberSummary five_number_summary(std::span<const double> values)
{
    if (values.empty()) {
        throw Error(ErrorCode::TooFewValues, "five-number summary of an empty vector");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return { sorted.front(), quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
             quantile_sorted(sorted, 0.75), sorted.back() };
}

const ValidityCell& ValidityReport::cell(AggregationMethod method, WeightScheme scheme) const
{
    for (const auto& c : cells) {
        if (c.method == method && c.scheme == scheme) {
            return c;
        }
    }
    throw Error(ErrorCode::InvalidConfig,
                "report has no cell " + std::string(to_string(method)) + "/" + std::string(to_string(scheme)));
}

ValidityReport build_validity_report(const ReviewDataset& dataset, std::span<const AggregationMethod> methods,
                                     std::span<const WeightScheme> schemes, const WeightOptions& weight_options,
                                     const PlotOptions& plot_options)
{
    if (dataset.essays.size() < 3) {
        throw Error(ErrorCode::TooFewValues,
                    "validity needs at least 3 retained essays, got " + std::to_string(dataset.essays.size()));
    }
    ValidityReport report;
    for (const auto& essay : dataset.essays) {
        if (!essay.instructor_grade) {
            throw Error(ErrorCode::InvalidRecord, "essay " + essay.essay_id + " has no instructor grade");
        }
        report.essay_ids.push_back(essay.essay_id);
        report.instructor.push_back(*essay.instructor_grade);
    }
    report.instructor_stats = descriptive(report.instructor);
    report.instructor_hist = histogram(report.instructor, plot_options.bin_width, plot_options.bin_origin);
    report.instructor_box = five_number_summary(report.instructor);

    // Weights depend only on the scheme, so they are joined once per essay.
    std::map<WeightScheme, std::vector<RaterWeights>> weights_by_scheme;
    for (auto scheme : schemes) {
        if (weights_by_scheme.count(scheme)) continue;
        auto& per_essay = weights_by_scheme[scheme];
        for (const auto& essay : dataset.essays) {
            const auto raters = essay.rater_ids();
            per_essay.push_back(
                weights_for_raters(raters, scheme, dataset.engagement, dataset.performance, weight_options));
        }
    }

    for (auto method : methods) {
        for (auto scheme : schemes) {
            ValidityCell cell;
            cell.method = method;
            cell.scheme = scheme;
            cell.m = dataset.essays.size();
            const auto& weights = weights_by_scheme.at(scheme);
            for (std::size_t e = 0; e < dataset.essays.size(); ++e) {
                const GradeSample sample(dataset.essays[e].peer_grades());
                AggregateResult result = scheme == WeightScheme::None
                    ? aggregate(sample, method)
                    : aggregate(sample, method, weights[e].weights);
                if (std::find(result.diagnostics.begin(), result.diagnostics.end(),
                              AggregateFlag::UnweightedFallback)
                    != result.diagnostics.end()) {
                    ++cell.fallback_essays;
                }
                cell.missing_records += weights[e].missing_records.size();
                cell.aggregated.push_back(result.value);
            }
            try {
                cell.r = pearson(cell.aggregated, report.instructor);
                cell.sig = significance(cell.r, cell.m);
                if (cell.sig.degenerate) {
                    cell.flags.emplace_back("DEGENERATE");
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ConstantVector) throw;
                cell.r = std::numeric_limits<double>::quiet_NaN();
                cell.sig.t_statistic = std::numeric_limits<double>::quiet_NaN();
                cell.sig.p_value = std::numeric_limits<double>::quiet_NaN();
                cell.flags.emplace_back("CONSTANT_VECTOR");
            }
            cell.stats = descriptive(cell.aggregated);
            cell.hist = histogram(cell.aggregated, plot_options.bin_width, plot_options.bin_origin);
            cell.box = five_number_summary(cell.aggregated);

            for (const auto& f : cell.flags) ++report.diagnostics[f];
            if (cell.fallback_essays) report.diagnostics["UNWEIGHTED_FALLBACK"] += cell.fallback_essays;
            if (cell.missing_records) report.diagnostics["MISSING_RECORD"] += cell.missing_records;
            report.cells.push_back(std::move(cell));
        }
    }
    for (const auto& d : dataset.diagnostics) ++report.diagnostics[d.code];
    if (!dataset.exclusions.empty()) report.diagnostics["EXCLUDED_ESSAYS"] = dataset.exclusions.size();
    return report;
}

} // namespace peergrade
