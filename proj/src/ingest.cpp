#include "peergrade/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "peergrade/format.hpp"

namespace peergrade {

namespace {

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    }

    std::vector<std::string_view> split(std::string_view line)
    {
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return fields;
    }

    struct Row {
        std::size_t line;
        std::vector<std::string_view> fields;
    };

    // Checks the header and returns the data rows with their line numbers.
    std::vector<Row> read_table(std::string_view csv, std::string_view expected_header, std::size_t columns)
    {
        if (csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);
        std::vector<Row> rows;
        bool header_seen = false;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos < csv.size()) {
            const auto nl = csv.find('\n', pos);
            const auto raw = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? csv.size() : nl + 1;
            ++line_no;
            const auto line = trim(raw);
            if (!header_seen) {
                auto fields = split(line);
                std::string joined;
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    if (i) joined += ',';
                    joined += fields[i];
                }
                if (joined != expected_header) {
                    throw Error(ErrorCode::MalformedHeader,
                                "expected header '" + std::string(expected_header) + "', got '" + std::string(line) + "'");
                }
                header_seen = true;
                continue;
            }
            if (line.empty()) continue;
            rows.push_back({ line_no, split(line) });
            if (rows.back().fields.size() != columns) {
                rows.back().fields.clear(); // flagged by the caller
            }
        }
        if (!header_seen) {
            throw Error(ErrorCode::MalformedHeader, "missing header '" + std::string(expected_header) + "'");
        }
        return rows;
    }

    bool valid_identifier(std::string_view id)
    {
        return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
            return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        });
    }

    std::optional<int> parse_int(std::string_view s)
    {
        int value = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
        return value;
    }

    std::optional<double> parse_real(std::string_view s)
    {
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
        return value;
    }

    // Thrown inside row handlers and turned into RowError entries.
    struct RowFailure {
        ErrorCode code;
        std::string message;
    };

    std::string identifier(std::string_view field, std::string_view name)
    {
        if (!valid_identifier(field)) {
            throw RowFailure{ ErrorCode::ParseError, std::string(name) + " '" + std::string(field) + "' is not a valid identifier" };
        }
        return std::string(field);
    }

    int integer(std::string_view field, std::string_view name)
    {
        auto v = parse_int(field);
        if (!v) {
            throw RowFailure{ ErrorCode::ParseError, std::string(name) + " '" + std::string(field) + "' is not an integer" };
        }
        return *v;
    }

    RubricScore rubric_from(const std::vector<std::string_view>& fields, std::size_t first)
    {
        RubricScore r{ integer(fields[first], "writing"), integer(fields[first + 1], "format_org"),
                       integer(fields[first + 2], "language_bib"), integer(fields[first + 3], "argumentation") };
        try {
            validate(r);
        } catch (const Error& e) {
            throw RowFailure{ ErrorCode::ParseError, e.what() };
        }
        return r;
    }

    template <typename Handler>
    std::vector<RowError> for_each_row(const std::vector<Row>& rows, std::size_t columns, Handler handle)
    {
        std::vector<RowError> errors;
        for (const auto& row : rows) {
            if (row.fields.empty()) {
                errors.push_back({ row.line, ErrorCode::ParseError, "expected " + std::to_string(columns) + " fields" });
                continue;
            }
            try {
                handle(row);
            } catch (const RowFailure& f) {
                errors.push_back({ row.line, f.code, f.message });
            }
        }
        return errors;
    }

    void append_rubric(std::string& out, const RubricScore& r)
    {
        out += std::to_string(r.writing) + ',' + std::to_string(r.format_org) + ',' + std::to_string(r.language_bib)
            + ',' + std::to_string(r.argumentation);
    }

} // namespace

std::string_view to_string(ExclusionReason reason) noexcept
{
    switch (reason) {
    case ExclusionReason::TooFewReviews: return "TOO_FEW_REVIEWS";
    case ExclusionReason::NoInstructorGrade: return "NO_INSTRUCTOR_GRADE";
    }
    return "UNKNOWN";
}

std::vector<double> Essay::peer_grades() const
{
    std::vector<double> out;
    out.reserve(reviews.size());
    for (const auto& r : reviews) out.push_back(r.grade);
    return out;
}

std::vector<StudentId> Essay::rater_ids() const
{
    std::vector<StudentId> out;
    out.reserve(reviews.size());
    for (const auto& r : reviews) out.push_back(r.rater_id);
    return out;
}

void validate(const RubricScore& rubric)
{
    for (int d : { rubric.writing, rubric.format_org, rubric.language_bib, rubric.argumentation }) {
        if (d < 1 || d > 5) {
            throw Error(ErrorCode::InvalidRubric, "rubric dimension " + std::to_string(d) + " outside 1..5");
        }
    }
}

Grade rescale_rubric(const RubricScore& rubric)
{
    validate(rubric);
    return Grade(static_cast<double>(rubric.total()) / 2.0);
}

RubricScore rubric_for_grade(double grade)
{
    const double doubled = grade * 2.0;
    if (!std::isfinite(grade) || doubled != std::round(doubled) || doubled < 4.0 || doubled > 20.0) {
        throw Error(ErrorCode::InvalidGrade, "grade " + format_double(grade) + " is not a rubric grade");
    }
    const int total = static_cast<int>(doubled);
    int dims[4];
    for (int i = 0; i < 4; ++i) {
        dims[i] = total / 4 + (i < total % 4 ? 1 : 0);
    }
    return { dims[0], dims[1], dims[2], dims[3] };
}

Parsed<std::vector<PeerReview>> parse_reviews(std::string_view csv)
{
    Parsed<std::vector<PeerReview>> out;
    std::set<std::pair<std::string, std::string>> seen;
    out.errors = for_each_row(read_table(csv, kReviewsHeader, 6), 6, [&](const Row& row) {
        PeerReview review;
        review.essay_id = identifier(row.fields[0], "essay_id");
        review.rater_id = identifier(row.fields[1], "rater_id");
        review.rubric = rubric_from(row.fields, 2);
        review.grade = rescale_rubric(review.rubric).value();
        if (!seen.emplace(review.essay_id, review.rater_id).second) {
            throw RowFailure{ ErrorCode::DuplicateKey,
                              "duplicate review of " + review.essay_id + " by " + review.rater_id };
        }
        out.value.push_back(std::move(review));
    });
    return out;
}

Parsed<InstructorRubrics> parse_instructor(std::string_view csv)
{
    Parsed<InstructorRubrics> out;
    out.errors = for_each_row(read_table(csv, kInstructorHeader, 5), 5, [&](const Row& row) {
        auto id = identifier(row.fields[0], "essay_id");
        auto rubric = rubric_from(row.fields, 1);
        if (!out.value.emplace(id, rubric).second) {
            throw RowFailure{ ErrorCode::DuplicateKey, "duplicate instructor grade for " + id };
        }
    });
    return out;
}

Parsed<Authorship> parse_essays(std::string_view csv)
{
    Parsed<Authorship> out;
    out.errors = for_each_row(read_table(csv, kEssaysHeader, 2), 2, [&](const Row& row) {
        auto id = identifier(row.fields[0], "essay_id");
        auto author = identifier(row.fields[1], "author_id");
        if (!out.value.emplace(id, author).second) {
            throw RowFailure{ ErrorCode::DuplicateKey, "duplicate essay " + id };
        }
    });
    return out;
}

Parsed<EngagementTable> parse_engagement(std::string_view csv)
{
    Parsed<EngagementTable> out;
    out.errors = for_each_row(read_table(csv, kEngagementHeader, 3), 3, [&](const Row& row) {
        EngagementRecord record{ identifier(row.fields[0], "student_id"), integer(row.fields[1], "lessons_completed"),
                                 integer(row.fields[2], "total_lessons") };
        try {
            validate(record);
        } catch (const Error& e) {
            throw RowFailure{ ErrorCode::ParseError, e.what() };
        }
        if (out.value.count(record.student_id)) {
            throw RowFailure{ ErrorCode::DuplicateKey, "duplicate engagement row for " + record.student_id };
        }
        out.value.emplace(record.student_id, std::move(record));
    });
    return out;
}

Parsed<PerformanceTable> parse_quizzes(std::string_view csv, std::optional<int> total_quizzes)
{
    Parsed<PerformanceTable> out;
    std::set<std::string> quiz_ids;
    out.errors = for_each_row(read_table(csv, kQuizzesHeader, 3), 3, [&](const Row& row) {
        auto student = identifier(row.fields[0], "student_id");
        auto quiz = identifier(row.fields[1], "quiz_id");
        auto score = parse_real(row.fields[2]);
        if (!score || *score < 0.0 || *score > 100.0) {
            throw RowFailure{ ErrorCode::ParseError, "score '" + std::string(row.fields[2]) + "' outside [0, 100]" };
        }
        auto& record = out.value[student];
        record.student_id = student;
        if (!record.quiz_scores.emplace(quiz, *score).second) {
            throw RowFailure{ ErrorCode::DuplicateKey, "duplicate score for " + student + "/" + quiz };
        }
        quiz_ids.insert(quiz);
    });
    const int total = total_quizzes.value_or(std::max<int>(1, static_cast<int>(quiz_ids.size())));
    if (total < 1) {
        throw Error(ErrorCode::InvalidConfig, "total quiz count must be at least 1");
    }
    for (auto it = out.value.begin(); it != out.value.end();) {
        it->second.total_quizzes = total;
        if (it->second.quiz_scores.size() > static_cast<std::size_t>(total)) {
            out.errors.push_back({ 0, ErrorCode::ParseError,
                                   it->first + " has more scores than the " + std::to_string(total) + " course quizzes" });
            it = out.value.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

std::string write_reviews(const std::vector<PeerReview>& reviews)
{
    std::string out(kReviewsHeader);
    out += '\n';
    for (const auto& r : reviews) {
        out += r.essay_id + ',' + r.rater_id + ',';
        append_rubric(out, r.rubric);
        out += '\n';
    }
    return out;
}

std::string write_instructor(const InstructorRubrics& rubrics)
{
    std::string out(kInstructorHeader);
    out += '\n';
    for (const auto& [id, rubric] : rubrics) {
        out += id + ',';
        append_rubric(out, rubric);
        out += '\n';
    }
    return out;
}

std::string write_essays(const Authorship& authors)
{
    std::string out(kEssaysHeader);
    out += '\n';
    for (const auto& [id, author] : authors) {
        out += id + ',' + author + '\n';
    }
    return out;
}

std::string write_engagement(const EngagementTable& engagement)
{
    std::string out(kEngagementHeader);
    out += '\n';
    for (const auto& [id, r] : engagement) {
        out += id + ',' + std::to_string(r.lessons_completed_on_time) + ',' + std::to_string(r.total_lessons) + '\n';
    }
    return out;
}

std::string write_quizzes(const PerformanceTable& performance)
{
    std::string out(kQuizzesHeader);
    out += '\n';
    for (const auto& [id, r] : performance) {
        for (const auto& [quiz, score] : r.quiz_scores) {
            out += id + ',' + quiz + ',' + format_double(score) + '\n';
        }
    }
    return out;
}

ReviewDataset build_dataset(const std::vector<PeerReview>& reviews, const Authorship& authors,
                            const InstructorRubrics& instructor, EngagementTable engagement,
                            PerformanceTable performance, const BuildOptions& options)
{
    ReviewDataset dataset;
    dataset.engagement = std::move(engagement);
    dataset.performance = std::move(performance);

    std::map<EssayId, std::vector<PeerReview>> by_essay;
    for (const auto& [id, rubric] : instructor) {
        by_essay[id];
    }
    for (const auto& review : reviews) {
        auto& bucket = by_essay[review.essay_id];
        auto author = authors.find(review.essay_id);
        if (author != authors.end() && author->second == review.rater_id) {
            dataset.diagnostics.push_back({ "SELF_REVIEW", review.essay_id, review.rater_id });
            continue;
        }
        bucket.push_back(review);
    }

    for (auto& [id, bucket] : by_essay) {
        std::stable_sort(bucket.begin(), bucket.end(),
                         [](const PeerReview& a, const PeerReview& b) { return a.rater_id < b.rater_id; });
        auto author = authors.find(id);
        if (author == authors.end()) {
            dataset.diagnostics.push_back({ "UNKNOWN_AUTHOR", id, {} });
        }
        auto rubric = instructor.find(id);
        if (bucket.size() < options.min_reviews) {
            dataset.exclusions.push_back({ id, ExclusionReason::TooFewReviews });
            continue;
        }
        if (options.require_instructor && rubric == instructor.end()) {
            dataset.exclusions.push_back({ id, ExclusionReason::NoInstructorGrade });
            continue;
        }
        Essay essay;
        essay.essay_id = id;
        essay.author_id = author == authors.end() ? StudentId{} : author->second;
        essay.reviews = std::move(bucket);
        if (rubric != instructor.end()) {
            essay.instructor_grade = rescale_rubric(rubric->second).value();
        }
        dataset.essays.push_back(std::move(essay));
    }

    std::sort(dataset.diagnostics.begin(), dataset.diagnostics.end(),
              [](const DatasetDiagnostic& a, const DatasetDiagnostic& b) {
                  return std::tie(a.essay_id, a.code, a.student_id) < std::tie(b.essay_id, b.code, b.student_id);
              });
    return dataset;
}

} // namespace peergrade
