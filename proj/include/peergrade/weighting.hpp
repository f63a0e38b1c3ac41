#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peergrade/aggregation.hpp"

namespace peergrade {

using StudentId = std::string;

struct EngagementRecord {
    StudentId student_id;
    int lessons_completed_on_time = 0;
    int total_lessons = 1;
};

struct PerformanceRecord {
    StudentId student_id;
    std::map<std::string, double> quiz_scores; // quiz id -> score in [0, 100]
    int total_quizzes = 1;
};

enum class WeightScheme { None, Engagement, Performance };

inline constexpr WeightScheme kAllSchemes[] = {
    WeightScheme::None,
    WeightScheme::Engagement,
    WeightScheme::Performance,
};

[[nodiscard]] std::string_view to_string(WeightScheme scheme) noexcept;
[[nodiscard]] std::optional<WeightScheme> parse_scheme(std::string_view name);

enum class QuizDenominator {
    TotalQuizzes,     // unattempted quizzes count as 0
    AttemptedQuizzes, // average over the recorded scores only
};

struct WeightOptions {
    QuizDenominator quiz_denominator = QuizDenominator::TotalQuizzes;
};

// Both throw INVALID_RECORD when the record violates its invariants.
[[nodiscard]] double engagement_weight(const EngagementRecord& record);
[[nodiscard]] double performance_weight(const PerformanceRecord& record, const WeightOptions& options = {});

void validate(const EngagementRecord& record);
void validate(const PerformanceRecord& record);

struct RaterWeights {
    WeightVector weights;
    std::vector<StudentId> missing_records; // raters that fell back to weight 0
};

/// Joins raters to their weights. NONE gives all ones; a rater without a
/// record under ENGAGEMENT or PERFORMANCE gets weight 0 and is listed in
/// missing_records.
[[nodiscard]] RaterWeights weights_for_raters(std::span<const StudentId> rater_ids, WeightScheme scheme,
                                              const std::map<StudentId, EngagementRecord>& engagement,
                                              const std::map<StudentId, PerformanceRecord>& performance,
                                              const WeightOptions& options = {});

} // namespace peergrade
