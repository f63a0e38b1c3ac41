#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "peergrade/error.hpp"
#include "peergrade/ingest.hpp"
#include "support/oracles.hpp"

using namespace peergrade;

namespace {

std::string reviews_csv(std::initializer_list<const char*> rows)
{
    std::string out = std::string(kReviewsHeader) + "\n";
    for (const char* r : rows) out += std::string(r) + "\n";
    return out;
}

ErrorCode header_error(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("rubric rescaling")
{
    CHECK(rescale_rubric({ 5, 5, 5, 5 }).value() == 10.0);
    CHECK(rescale_rubric({ 1, 1, 1, 1 }).value() == 2.0);
    CHECK(rescale_rubric({ 5, 4, 3, 2 }).value() == 7.0);
    CHECK_THROWS_AS((void)rescale_rubric({ 6, 5, 5, 5 }), Error);
    CHECK_THROWS_AS((void)rescale_rubric({ 0, 5, 5, 5 }), Error);
}

TEST_CASE("rescaling is strictly monotone in every dimension")
{
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b)
            for (int c = 1; c <= 5; ++c)
                for (int d = 1; d <= 4; ++d) {
                    const double base = rescale_rubric({ a, b, c, d }).value();
                    CHECK(rescale_rubric({ a, b, c, d + 1 }).value() > base);
                    if (a < 5) CHECK(rescale_rubric({ a + 1, b, c, d }).value() > base);
                    if (b < 5) CHECK(rescale_rubric({ a, b + 1, c, d }).value() > base);
                    if (c < 5) CHECK(rescale_rubric({ a, b, c + 1, d }).value() > base);
                }
}

TEST_CASE("rubric for a grade inverts rescaling")
{
    for (int total = 4; total <= 20; ++total) {
        const auto r = rubric_for_grade(total / 2.0);
        CHECK(r.total() == total);
        CHECK(rescale_rubric(r).value() == total / 2.0);
    }
    CHECK(rubric_for_grade(7.5) == RubricScore{ 4, 4, 4, 3 });
    CHECK_THROWS_AS((void)rubric_for_grade(7.3), Error);
    CHECK_THROWS_AS((void)rubric_for_grade(1.5), Error);
}

TEST_CASE("parse reviews")
{
    auto ok = parse_reviews(reviews_csv({ "e1,r9,5,5,5,5" }));
    REQUIRE(ok.value.size() == 1);
    CHECK(ok.errors.empty());
    CHECK(ok.value[0].essay_id == "e1");
    CHECK(ok.value[0].rater_id == "r9");
    CHECK(ok.value[0].grade == 10.0);

    auto bad = parse_reviews(reviews_csv({ "e1,r9,6,5,5,5" }));
    CHECK(bad.value.empty());
    REQUIRE(bad.errors.size() == 1);
    CHECK(bad.errors[0].code == ErrorCode::ParseError);
    CHECK(bad.errors[0].line == 2);

    auto empty = parse_reviews(std::string(kReviewsHeader) + "\n");
    CHECK(empty.value.empty());
    CHECK(empty.errors.empty());

    auto dup = parse_reviews(reviews_csv({ "e1,r1,3,3,3,3", "e1,r1,4,4,4,4" }));
    REQUIRE(dup.value.size() == 1);
    CHECK(dup.value[0].rubric.writing == 3);
    REQUIRE(dup.errors.size() == 1);
    CHECK(dup.errors[0].code == ErrorCode::DuplicateKey);
    CHECK(dup.errors[0].line == 3);
}

TEST_CASE("parse rejects malformed rows without aborting")
{
    auto p = parse_reviews(reviews_csv({ "e1,r1,3,3,3", "e1,r2,x,3,3,3", "e 1,r3,3,3,3,3", "e1,r4,3,3,3,3" }));
    CHECK(p.value.size() == 1);
    CHECK(p.errors.size() == 3);
    for (const auto& e : p.errors) CHECK(e.code == ErrorCode::ParseError);
}

TEST_CASE("headers must match exactly")
{
    CHECK(header_error([] { (void)parse_reviews("e1,r9,5,5,5,5\n"); }) == ErrorCode::MalformedHeader);
    CHECK(header_error([] { (void)parse_reviews(""); }) == ErrorCode::MalformedHeader);
    CHECK(header_error([] { (void)parse_engagement("student_id,lessons,total_lessons\n"); })
          == ErrorCode::MalformedHeader);
    CHECK(header_error([] { (void)parse_essays("author_id,essay_id\n"); }) == ErrorCode::MalformedHeader);
}

TEST_CASE("CRLF, BOM and padding are accepted")
{
    const std::string text = "\xEF\xBB\xBF" + std::string(kReviewsHeader) + "\r\n e1 , r2 ,3,4,5,2\r\n\r\n";
    auto p = parse_reviews(text);
    REQUIRE(p.value.size() == 1);
    CHECK(p.errors.empty());
    CHECK(p.value[0].essay_id == "e1");
    CHECK(p.value[0].rater_id == "r2");
    CHECK(p.value[0].grade == 7.0);
}

TEST_CASE("parse engagement and quizzes")
{
    auto e = parse_engagement(std::string(kEngagementHeader) + "\ns1,7,7\n");
    REQUIRE(e.value.count("s1"));
    CHECK(e.value.at("s1").lessons_completed_on_time == 7);
    CHECK(e.value.at("s1").total_lessons == 7);

    auto dup_e = parse_engagement(std::string(kEngagementHeader) + "\ns1,7,7\ns1,3,7\n");
    REQUIRE(dup_e.errors.size() == 1);
    CHECK(dup_e.errors[0].code == ErrorCode::DuplicateKey);
    CHECK(dup_e.value.at("s1").lessons_completed_on_time == 7);

    auto bad_e = parse_engagement(std::string(kEngagementHeader) + "\ns1,8,7\n");
    REQUIRE(bad_e.errors.size() == 1);
    CHECK(bad_e.errors[0].code == ErrorCode::ParseError);

    auto q = parse_quizzes(std::string(kQuizzesHeader) + "\ns1,q1,80\ns1,q2,90\n");
    REQUIRE(q.value.count("s1"));
    CHECK(q.value.at("s1").quiz_scores.size() == 2);
    CHECK(q.value.at("s1").total_quizzes == 2);

    auto dup_q = parse_quizzes(std::string(kQuizzesHeader) + "\ns1,q1,80\ns1,q1,80\n");
    REQUIRE(dup_q.errors.size() == 1);
    CHECK(dup_q.errors[0].code == ErrorCode::DuplicateKey);

    auto fixed = parse_quizzes(std::string(kQuizzesHeader) + "\ns1,q1,80\n", 7);
    CHECK(fixed.value.at("s1").total_quizzes == 7);

    auto range = parse_quizzes(std::string(kQuizzesHeader) + "\ns1,q1,101\n");
    REQUIRE(range.errors.size() == 1);
    CHECK(range.errors[0].code == ErrorCode::ParseError);
}

TEST_CASE("build dataset exclusions")
{
    // Five essays, e5 with only two reviews.
    std::string csv = std::string(kReviewsHeader) + "\n";
    Authorship authors;
    InstructorRubrics instructor;
    for (int e = 1; e <= 5; ++e) {
        const std::string id = "e" + std::to_string(e);
        authors[id] = "s" + std::to_string(e);
        instructor[id] = { 3, 3, 3, 3 };
        for (int r = 1; r <= (e == 5 ? 2 : 3); ++r) {
            csv += id + ",s" + std::to_string((e + r - 1) % 5 + 1) + ",4,4,4,4\n";
        }
    }
    auto reviews = parse_reviews(csv);
    REQUIRE(reviews.errors.empty());
    auto d = build_dataset(reviews.value, authors, instructor, {}, {});
    CHECK(d.essays.size() == 4);
    REQUIRE(d.exclusions.size() == 1);
    CHECK(d.exclusions[0].essay_id == "e5");
    CHECK(d.exclusions[0].reason == ExclusionReason::TooFewReviews);

    instructor.erase("e2");
    auto no_grade = build_dataset(reviews.value, authors, instructor, {}, {});
    CHECK(no_grade.essays.size() == 3);
    REQUIRE(no_grade.exclusions.size() == 2);
    CHECK(no_grade.exclusions[0].essay_id == "e2");
    CHECK(no_grade.exclusions[0].reason == ExclusionReason::NoInstructorGrade);

    BuildOptions optional_instructor;
    optional_instructor.require_instructor = false;
    auto lenient = build_dataset(reviews.value, authors, instructor, {}, {}, optional_instructor);
    CHECK(lenient.essays.size() == 4);
}

TEST_CASE("self reviews are dropped")
{
    auto reviews = parse_reviews(reviews_csv({ "e1,s1,5,5,5,5", "e1,s2,3,3,3,3", "e1,s3,3,3,3,3", "e1,s4,3,3,3,3" }));
    Authorship authors{ { "e1", "s1" } };
    InstructorRubrics instructor{ { "e1", { 3, 3, 3, 3 } } };
    auto d = build_dataset(reviews.value, authors, instructor, {}, {});
    REQUIRE(d.essays.size() == 1);
    CHECK(d.essays[0].reviews.size() == 3);
    REQUIRE(d.diagnostics.size() == 1);
    CHECK(d.diagnostics[0].code == "SELF_REVIEW");
    CHECK(d.diagnostics[0].student_id == "s1");
}

TEST_CASE("extra reviews are kept")
{
    auto reviews = parse_reviews(reviews_csv({ "e1,s2,3,3,3,3", "e1,s3,3,3,3,3", "e1,s4,3,3,3,3", "e1,s5,5,5,5,5" }));
    auto d = build_dataset(reviews.value, { { "e1", "s1" } }, { { "e1", { 3, 3, 3, 3 } } }, {}, {});
    REQUIRE(d.essays.size() == 1);
    CHECK(d.essays[0].reviews.size() == 4);
}

TEST_CASE("round trip through the canonical writers")
{
    const std::string messy = std::string(kReviewsHeader) + "\r\ne2,s1,3,3,3,3\r\n  e1 ,s3,5,4,3,2  \r\n\r\n";
    const std::string canonical = std::string(kReviewsHeader) + "\ne2,s1,3,3,3,3\ne1,s3,5,4,3,2\n";
    CHECK(write_reviews(parse_reviews(messy).value) == canonical);
    CHECK(write_reviews(parse_reviews(canonical).value) == canonical);

    const std::string instructor = std::string(kInstructorHeader) + "\ne1,5,5,5,5\ne2,1,2,3,4\n";
    CHECK(write_instructor(parse_instructor(instructor).value) == instructor);
    const std::string essays = std::string(kEssaysHeader) + "\ne1,s1\ne2,s2\n";
    CHECK(write_essays(parse_essays(essays).value) == essays);
    const std::string engagement = std::string(kEngagementHeader) + "\ns1,3,7\ns2,7,7\n";
    CHECK(write_engagement(parse_engagement(engagement).value) == engagement);
    const std::string quizzes = std::string(kQuizzesHeader) + "\ns1,q1,80\ns1,q2,92.5\ns2,q1,0\n";
    CHECK(write_quizzes(parse_quizzes(quizzes).value) == quizzes);
}

TEST_CASE("random tables round trip")
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PeerReview> reviews;
        std::set<std::pair<std::string, std::string>> seen;
        const auto n = gen::between(rng, 0, 30);
        for (std::size_t i = 0; i < n; ++i) {
            PeerReview r;
            r.essay_id = "e" + std::to_string(gen::between(rng, 1, 9));
            r.rater_id = "s" + std::to_string(gen::between(rng, 1, 9));
            if (!seen.insert({ r.essay_id, r.rater_id }).second) continue;
            r.rubric = { int(gen::between(rng, 1, 5)), int(gen::between(rng, 1, 5)), int(gen::between(rng, 1, 5)),
                         int(gen::between(rng, 1, 5)) };
            r.grade = r.rubric.total() / 2.0;
            reviews.push_back(r);
        }
        const auto text = write_reviews(reviews);
        const auto parsed = parse_reviews(text);
        CHECK(parsed.errors.empty());
        CHECK(write_reviews(parsed.value) == text);
    }
}

TEST_CASE("partition is independent of row order and accounts for every essay")
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PeerReview> reviews;
        Authorship authors;
        InstructorRubrics instructor;
        std::set<std::string> essay_ids;
        const auto n_essays = gen::between(rng, 1, 12);
        for (std::size_t e = 0; e < n_essays; ++e) {
            const std::string id = "e" + std::to_string(e);
            authors[id] = "s" + std::to_string(e);
            if (gen::uniform(rng, 0, 1) < 0.8) {
                instructor[id] = { 3, 3, 3, 3 };
                essay_ids.insert(id);
            }
            const auto k = gen::between(rng, 0, 5);
            for (std::size_t r = 0; r < k; ++r) {
                PeerReview review{ id, "s" + std::to_string((e + r) % 14), { 4, 4, 4, 4 }, 8.0 };
                reviews.push_back(review);
                essay_ids.insert(id);
            }
        }
        const auto a = build_dataset(reviews, authors, instructor, {}, {});
        std::shuffle(reviews.begin(), reviews.end(), rng);
        const auto b = build_dataset(reviews, authors, instructor, {}, {});
        CHECK(a.essays.size() + a.exclusions.size() == essay_ids.size());
        REQUIRE(a.essays.size() == b.essays.size());
        for (std::size_t i = 0; i < a.essays.size(); ++i) {
            CHECK(a.essays[i].essay_id == b.essays[i].essay_id);
            CHECK(a.essays[i].rater_ids() == b.essays[i].rater_ids());
        }
        REQUIRE(a.exclusions.size() == b.exclusions.size());
        for (std::size_t i = 0; i < a.exclusions.size(); ++i) {
            CHECK(a.exclusions[i].essay_id == b.exclusions[i].essay_id);
            CHECK(a.exclusions[i].reason == b.exclusions[i].reason);
        }
    }
}
