#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peergrade/weighting.hpp"

namespace peergrade {

using EssayId = std::string;

/// Four rubric dimensions, each scored 1..5.
struct RubricScore {
    int writing = 1;
    int format_org = 1;
    int language_bib = 1;
    int argumentation = 1;

    [[nodiscard]] int total() const noexcept { return writing + format_org + language_bib + argumentation; }
    friend bool operator==(const RubricScore&, const RubricScore&) = default;
};

struct PeerReview {
    EssayId essay_id;
    StudentId rater_id;
    RubricScore rubric;
    double grade = 0.0; // rubric total / 2
};

struct Essay {
    EssayId essay_id;
    StudentId author_id; // empty when the authorship map lacks the essay
    std::vector<PeerReview> reviews; // ordered by rater id
    std::optional<double> instructor_grade;

    [[nodiscard]] std::vector<double> peer_grades() const;
    [[nodiscard]] std::vector<StudentId> rater_ids() const;
};

enum class ExclusionReason { TooFewReviews, NoInstructorGrade };

[[nodiscard]] std::string_view to_string(ExclusionReason reason) noexcept;

struct Exclusion {
    EssayId essay_id;
    ExclusionReason reason;
};

struct DatasetDiagnostic {
    std::string code; // SELF_REVIEW, UNKNOWN_AUTHOR
    EssayId essay_id;
    StudentId student_id;
};

struct ReviewDataset {
    std::vector<Essay> essays; // retained essays ordered by essay id
    std::map<StudentId, EngagementRecord> engagement;
    std::map<StudentId, PerformanceRecord> performance;
    std::vector<Exclusion> exclusions; // ordered by essay id
    std::vector<DatasetDiagnostic> diagnostics;
};

} // namespace peergrade
