#pragma once

#include <span>
#include <string>
#include <vector>

#include "peergrade/ingest.hpp"
#include "peergrade/validity.hpp"

namespace peergrade {

// Text renderings of validity results. Numbers use format_double, so equal
// reports render to identical bytes.

/// `method,scheme,r,t,p,m`, one row per cell in report order.
[[nodiscard]] std::string grid_csv(const ValidityReport& report);

/// Flat key=value report: grid, descriptive statistics and diagnostics.
[[nodiscard]] std::string report_text(const ValidityReport& report);

/// `scheme,bin_lower,bin_upper,count` for one method across its schemes.
[[nodiscard]] std::string histogram_csv(const ValidityReport& report, AggregationMethod method, double bin_width);
[[nodiscard]] std::string instructor_histogram_csv(const ValidityReport& report, double bin_width);

/// `scheme,min,q1,median,q3,max` for one method across its schemes.
[[nodiscard]] std::string five_number_csv(const ValidityReport& report, AggregationMethod method);
[[nodiscard]] std::string instructor_five_number_csv(const ValidityReport& report);

/// Per-essay aggregated grades, `essay_id,<method>_<scheme>...,instructor`.
[[nodiscard]] std::string scores_csv(const ValidityReport& report);

/// `method,scheme,replications,mean_r,min_r,max_r,mean_rank` across
/// replications; rank 1 is the best method within a scheme.
[[nodiscard]] std::string summary_csv(std::span<const ValidityReport> reports);

/// `essay_id,reason`.
[[nodiscard]] std::string exclusions_csv(const ReviewDataset& dataset);
/// `code,essay_id,student_id`.
[[nodiscard]] std::string dataset_diagnostics_csv(const ReviewDataset& dataset);
/// `file,line,code,message`; messages have commas replaced.
[[nodiscard]] std::string row_errors_csv(const std::vector<std::pair<std::string, RowError>>& errors);

struct CellSummary {
    AggregationMethod method;
    WeightScheme scheme;
    std::size_t replications = 0; // cells with a finite r
    double mean_r = 0.0;
    double min_r = 0.0;
    double max_r = 0.0;
    double mean_rank = 0.0;
};

/// Averages over replications. Ranks order methods by r within each scheme
/// and replication (1 = highest r, ties share the lower rank, NaN last).
[[nodiscard]] std::vector<CellSummary> summarize(std::span<const ValidityReport> reports);

} // namespace peergrade
