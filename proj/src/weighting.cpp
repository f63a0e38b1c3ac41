#include "peergrade/weighting.hpp"

#include <cmath>

#include "peergrade/error.hpp"

namespace peergrade {

std::string_view to_string(WeightScheme scheme) noexcept
{
    switch (scheme) {
    case WeightScheme::None: return "NONE";
    case WeightScheme::Engagement: return "ENGAGEMENT";
    case WeightScheme::Performance: return "PERFORMANCE";
    }
    return "UNKNOWN";
}

std::optional<WeightScheme> parse_scheme(std::string_view name)
{
    for (auto s : kAllSchemes) {
        if (name == to_string(s)) {
            return s;
        }
    }
    return std::nullopt;
}

void validate(const EngagementRecord& record)
{
    if (record.total_lessons < 1) {
        throw Error(ErrorCode::InvalidRecord, record.student_id + ": total_lessons must be at least 1");
    }
    if (record.lessons_completed_on_time < 0 || record.lessons_completed_on_time > record.total_lessons) {
        throw Error(ErrorCode::InvalidRecord, record.student_id + ": lessons_completed outside [0, total_lessons]");
    }
}

void validate(const PerformanceRecord& record)
{
    if (record.total_quizzes < 1) {
        throw Error(ErrorCode::InvalidRecord, record.student_id + ": total_quizzes must be at least 1");
    }
    if (record.quiz_scores.size() > static_cast<std::size_t>(record.total_quizzes)) {
        throw Error(ErrorCode::InvalidRecord, record.student_id + ": more recorded scores than quizzes");
    }
    for (const auto& [quiz, score] : record.quiz_scores) {
        if (!std::isfinite(score) || score < 0.0 || score > 100.0) {
            throw Error(ErrorCode::InvalidRecord, record.student_id + ": score for " + quiz + " outside [0, 100]");
        }
    }
}

double engagement_weight(const EngagementRecord& record)
{
    validate(record);
    return static_cast<double>(record.lessons_completed_on_time) / static_cast<double>(record.total_lessons);
}

double performance_weight(const PerformanceRecord& record, const WeightOptions& options)
{
    validate(record);
    double sum = 0.0;
    for (const auto& [quiz, score] : record.quiz_scores) {
        sum += score;
    }
    std::size_t denominator = static_cast<std::size_t>(record.total_quizzes);
    if (options.quiz_denominator == QuizDenominator::AttemptedQuizzes) {
        if (record.quiz_scores.empty()) {
            return 0.0;
        }
        denominator = record.quiz_scores.size();
    }
    return sum / (static_cast<double>(denominator) * 100.0);
}

RaterWeights weights_for_raters(std::span<const StudentId> rater_ids, WeightScheme scheme,
                                const std::map<StudentId, EngagementRecord>& engagement,
                                const std::map<StudentId, PerformanceRecord>& performance,
                                const WeightOptions& options)
{
    std::vector<double> weights;
    weights.reserve(rater_ids.size());
    std::vector<StudentId> missing;
    for (const auto& id : rater_ids) {
        switch (scheme) {
        case WeightScheme::None:
            weights.push_back(1.0);
            break;
        case WeightScheme::Engagement:
            if (auto it = engagement.find(id); it != engagement.end()) {
                weights.push_back(engagement_weight(it->second));
            } else {
                weights.push_back(0.0);
                missing.push_back(id);
            }
            break;
        case WeightScheme::Performance:
            if (auto it = performance.find(id); it != performance.end()) {
                weights.push_back(performance_weight(it->second, options));
            } else {
                weights.push_back(0.0);
                missing.push_back(id);
            }
            break;
        }
    }
    return { WeightVector(std::move(weights)), std::move(missing) };
}

} // namespace peergrade
