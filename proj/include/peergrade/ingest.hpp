#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peergrade/aggregation.hpp"
#include "peergrade/dataset.hpp"
#include "peergrade/error.hpp"

namespace peergrade {

// CSV dialect: comma separated, mandatory header, LF or CRLF line endings,
// unquoted fields. Identifiers match [A-Za-z0-9_-]+. Surrounding spaces are
// trimmed and blank lines skipped.
inline constexpr std::string_view kReviewsHeader = "essay_id,rater_id,writing,format_org,language_bib,argumentation";
inline constexpr std::string_view kInstructorHeader = "essay_id,writing,format_org,language_bib,argumentation";
inline constexpr std::string_view kEssaysHeader = "essay_id,author_id";
inline constexpr std::string_view kEngagementHeader = "student_id,lessons_completed,total_lessons";
inline constexpr std::string_view kQuizzesHeader = "student_id,quiz_id,score";

/// Throws INVALID_RUBRIC when a dimension lies outside 1..5.
void validate(const RubricScore& rubric);

/// Rubric total halved: 4..20 maps onto [2, 10].
[[nodiscard]] Grade rescale_rubric(const RubricScore& rubric);

/// Inverse of rescale_rubric for grades on the half-point lattice. The total
/// is spread over the dimensions as evenly as possible, earlier dimensions
/// taking the remainder. Throws INVALID_GRADE off the lattice.
[[nodiscard]] RubricScore rubric_for_grade(double grade);

struct RowError {
    std::size_t line = 0; // 1-based, header is line 1
    ErrorCode code = ErrorCode::ParseError;
    std::string message;
};

/// Rows that fail validation are reported in `errors` and skipped; the first
/// occurrence of a duplicated key is kept. A wrong or missing header throws
/// MALFORMED_HEADER.
template <typename T>
struct Parsed {
    T value;
    std::vector<RowError> errors;
};

using InstructorRubrics = std::map<EssayId, RubricScore>;
using Authorship = std::map<EssayId, StudentId>;
using EngagementTable = std::map<StudentId, EngagementRecord>;
using PerformanceTable = std::map<StudentId, PerformanceRecord>;

/// Duplicate (essay_id, rater_id) pairs are DUPLICATE_KEY row errors.
[[nodiscard]] Parsed<std::vector<PeerReview>> parse_reviews(std::string_view csv);
[[nodiscard]] Parsed<InstructorRubrics> parse_instructor(std::string_view csv);
[[nodiscard]] Parsed<Authorship> parse_essays(std::string_view csv);
[[nodiscard]] Parsed<EngagementTable> parse_engagement(std::string_view csv);
/// total_quizzes defaults to the number of distinct quiz ids in the file.
[[nodiscard]] Parsed<PerformanceTable> parse_quizzes(std::string_view csv,
                                                     std::optional<int> total_quizzes = std::nullopt);

// Canonical writers: header first, LF endings, map-backed tables in key order.
[[nodiscard]] std::string write_reviews(const std::vector<PeerReview>& reviews);
[[nodiscard]] std::string write_instructor(const InstructorRubrics& rubrics);
[[nodiscard]] std::string write_essays(const Authorship& authors);
[[nodiscard]] std::string write_engagement(const EngagementTable& engagement);
[[nodiscard]] std::string write_quizzes(const PerformanceTable& performance);

struct BuildOptions {
    std::size_t min_reviews = 3;
    bool require_instructor = true;
};

/**
 * Joins reviews, authorship, instructor grades and weight records.
 *
 * Self-reviews are dropped with a SELF_REVIEW diagnostic. Essays with fewer
 * than min_reviews remaining reviews are excluded as TOO_FEW_REVIEWS, then
 * essays without an instructor grade as NO_INSTRUCTOR_GRADE (when
 * required). Essays with extra reviews keep all of them. Output order is by
 * essay id and rater id, whatever the input row order.
 */
[[nodiscard]] ReviewDataset build_dataset(const std::vector<PeerReview>& reviews, const Authorship& authors,
                                          const InstructorRubrics& instructor, EngagementTable engagement,
                                          PerformanceTable performance, const BuildOptions& options = {});

} // namespace peergrade
