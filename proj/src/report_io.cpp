#include "peergrade/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peergrade/format.hpp"

namespace peergrade {

namespace {

    std::string fd(double v) { return format_double(v); }

    std::vector<WeightScheme> schemes_of(const ValidityReport& report, AggregationMethod method)
    {
        std::vector<WeightScheme> out;
        for (const auto& c : report.cells) {
            if (c.method == method) out.push_back(c.scheme);
        }
        return out;
    }

    void append_hist(std::string& out, std::string_view label, const std::vector<HistogramBin>& bins, double width)
    {
        for (const auto& b : bins) {
            out += label;
            out += ',' + fd(b.lower) + ',' + fd(b.lower + width) + ',' + std::to_string(b.count) + '\n';
        }
    }

    void append_box(std::string& out, std::string_view label, const FiveNumberSummary& s)
    {
        out += label;
        out += ',' + fd(s.min) + ',' + fd(s.q1) + ',' + fd(s.median) + ',' + fd(s.q3) + ',' + fd(s.max) + '\n';
    }

    void append_stats(std::string& out, const std::string& prefix, const DescriptiveStats& s)
    {
        out += prefix + ".mean=" + fd(s.mean) + '\n';
        out += prefix + ".sd=" + fd(s.sd) + '\n';
        out += prefix + ".min=" + fd(s.min) + '\n';
        out += prefix + ".max=" + fd(s.max) + '\n';
        out += prefix + ".count=" + std::to_string(s.count) + '\n';
    }

    std::string join(const std::vector<std::string>& items, char sep)
    {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += sep;
            out += items[i];
        }
        return out;
    }

} // namespace

std::string grid_csv(const ValidityReport& report)
{
    std::string out = "method,scheme,r,t,p,m\n";
    for (const auto& c : report.cells) {
        out += std::string(to_string(c.method)) + ',' + std::string(to_string(c.scheme)) + ',' + fd(c.r) + ','
            + fd(c.sig.t_statistic) + ',' + fd(c.sig.p_value) + ',' + std::to_string(c.m) + '\n';
    }
    return out;
}

std::string report_text(const ValidityReport& report)
{
    std::string out;
    out += "essays=" + std::to_string(report.essay_ids.size()) + '\n';
    append_stats(out, "instructor", report.instructor_stats);
    for (const auto& c : report.cells) {
        const std::string key = "cell." + std::string(to_string(c.method)) + "." + std::string(to_string(c.scheme));
        out += key + ".r=" + fd(c.r) + '\n';
        out += key + ".t=" + fd(c.sig.t_statistic) + '\n';
        out += key + ".p=" + fd(c.sig.p_value) + '\n';
        out += key + ".m=" + std::to_string(c.m) + '\n';
        out += key + ".flags=" + join(c.flags, ';') + '\n';
        out += key + ".fallback_essays=" + std::to_string(c.fallback_essays) + '\n';
        out += key + ".missing_records=" + std::to_string(c.missing_records) + '\n';
        append_stats(out, key, c.stats);
    }
    for (const auto& [code, count] : report.diagnostics) {
        out += "diagnostic." + code + "=" + std::to_string(count) + '\n';
    }
    return out;
}

std::string histogram_csv(const ValidityReport& report, AggregationMethod method, double bin_width)
{
    std::string out = "scheme,bin_lower,bin_upper,count\n";
    for (auto scheme : schemes_of(report, method)) {
        append_hist(out, to_string(scheme), report.cell(method, scheme).hist, bin_width);
    }
    return out;
}

std::string instructor_histogram_csv(const ValidityReport& report, double bin_width)
{
    std::string out = "scheme,bin_lower,bin_upper,count\n";
    append_hist(out, "INSTRUCTOR", report.instructor_hist, bin_width);
    return out;
}

std::string five_number_csv(const ValidityReport& report, AggregationMethod method)
{
    std::string out = "scheme,min,q1,median,q3,max\n";
    for (auto scheme : schemes_of(report, method)) {
        append_box(out, to_string(scheme), report.cell(method, scheme).box);
    }
    return out;
}

std::string instructor_five_number_csv(const ValidityReport& report)
{
    std::string out = "scheme,min,q1,median,q3,max\n";
    append_box(out, "INSTRUCTOR", report.instructor_box);
    return out;
}

std::string scores_csv(const ValidityReport& report)
{
    std::string out = "essay_id";
    for (const auto& c : report.cells) {
        out += ',' + std::string(to_string(c.method)) + '_' + std::string(to_string(c.scheme));
    }
    out += ",instructor\n";
    for (std::size_t e = 0; e < report.essay_ids.size(); ++e) {
        out += report.essay_ids[e];
        for (const auto& c : report.cells) out += ',' + fd(c.aggregated[e]);
        out += ',' + fd(report.instructor[e]) + '\n';
    }
    return out;
}

std::vector<CellSummary> summarize(std::span<const ValidityReport> reports)
{
    std::vector<CellSummary> out;
    if (reports.empty()) return out;
    for (const auto& c : reports.front().cells) {
        out.push_back({ c.method, c.scheme, 0, 0.0, std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(), 0.0 });
    }
    for (const auto& report : reports) {
        for (auto& s : out) {
            const auto& cell = report.cell(s.method, s.scheme);
            double rank = 1.0;
            for (const auto& other : report.cells) {
                if (other.scheme != s.scheme || other.method == s.method) continue;
                const bool other_better = std::isnan(cell.r) ? !std::isnan(other.r) : other.r > cell.r;
                if (other_better) rank += 1.0;
            }
            s.mean_rank += rank;
            if (std::isnan(cell.r)) continue;
            ++s.replications;
            s.mean_r += cell.r;
            s.min_r = std::min(s.min_r, cell.r);
            s.max_r = std::max(s.max_r, cell.r);
        }
    }
    for (auto& s : out) {
        s.mean_rank /= static_cast<double>(reports.size());
        if (s.replications == 0) {
            s.mean_r = s.min_r = s.max_r = std::numeric_limits<double>::quiet_NaN();
        } else {
            s.mean_r /= static_cast<double>(s.replications);
        }
    }
    return out;
}

std::string summary_csv(std::span<const ValidityReport> reports)
{
    std::string out = "method,scheme,replications,mean_r,min_r,max_r,mean_rank\n";
    for (const auto& s : summarize(reports)) {
        out += std::string(to_string(s.method)) + ',' + std::string(to_string(s.scheme)) + ','
            + std::to_string(s.replications) + ',' + fd(s.mean_r) + ',' + fd(s.min_r) + ',' + fd(s.max_r) + ','
            + fd(s.mean_rank) + '\n';
    }
    return out;
}

std::string exclusions_csv(const ReviewDataset& dataset)
{
    std::string out = "essay_id,reason\n";
    for (const auto& e : dataset.exclusions) {
        out += e.essay_id + ',' + std::string(to_string(e.reason)) + '\n';
    }
    return out;
}

std::string dataset_diagnostics_csv(const ReviewDataset& dataset)
{
    std::string out = "code,essay_id,student_id\n";
    for (const auto& d : dataset.diagnostics) {
        out += d.code + ',' + d.essay_id + ',' + d.student_id + '\n';
    }
    return out;
}

std::string row_errors_csv(const std::vector<std::pair<std::string, RowError>>& errors)
{
    std::string out = "file,line,code,message\n";
    for (const auto& [file, e] : errors) {
        std::string message = e.message;
        std::replace(message.begin(), message.end(), ',', ';');
        out += file + ',' + std::to_string(e.line) + ',' + std::string(to_string(e.code)) + ',' + message + '\n';
    }
    return out;
}

} // namespace peergrade
