#include "peergrade/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numbers>
#include <thread>

#include "peergrade/error.hpp"
#include "peergrade/format.hpp"

namespace peergrade {

double CohortRng::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double CohortRng::normal(double mean, double sd)
{
    const double u1 = 1.0 - uniform01(); // (0, 1]
    const double u2 = uniform01();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CohortRng::gamma(double shape)
{
    if (!(shape > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "gamma shape must be positive");
    }
    if (shape < 1.0) {
        const double boost = std::pow(1.0 - uniform01(), 1.0 / shape);
        return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double CohortRng::beta(double a, double b)
{
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

std::uint64_t CohortRng::below(std::uint64_t n)
{
    if (n == 0) {
        throw Error(ErrorCode::InvalidConfig, "below(0)");
    }
    // 2^64 mod n, computed without 128-bit arithmetic.
    const std::uint64_t remainder = (0 - n) % n;
    while (true) {
        const std::uint64_t x = engine_();
        if (remainder == 0 || x < 0 - remainder) {
            return x % n;
        }
    }
}

void CohortConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (n_students < 4) fail("n_students must be at least 4");
    if (reviews_per_student < 1 || reviews_per_student >= n_students) fail("reviews_per_student must lie in [1, n_students)");
    for (double v : { quality_mean, quality_sd, noise_sd_max, noise_sd_min, competence_a, competence_b, bias_mean, bias_sd, engagement_coupling,
                      quiz_noise_sd }) {
        if (!std::isfinite(v)) fail("distribution parameters must be finite");
    }
    if (quality_sd < 0.0 || bias_sd < 0.0 || quiz_noise_sd < 0.0) fail("standard deviations must be non-negative");
    if (!(competence_a > 0.0 && competence_b > 0.0)) fail("competence shape parameters must be positive");
    if (noise_sd_min < 0.0 || noise_sd_min > noise_sd_max) fail("need 0 <= noise_sd_min <= noise_sd_max");
    if (engagement_coupling < 0.0 || engagement_coupling > 1.0) fail("engagement_coupling must lie in [0, 1]");
    if (total_lessons < 1 || total_quizzes < 1) fail("lesson and quiz counts must be positive");
}

namespace {

    template <typename T>
    T parse_number(std::string_view key, std::string_view value)
    {
        T out{};
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            throw Error(ErrorCode::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
        }
        return out;
    }

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    std::string padded(char prefix, std::size_t index, std::size_t n)
    {
        const std::size_t width = std::max<std::size_t>(3, std::to_string(n).size());
        auto digits = std::to_string(index + 1);
        return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
    }

} // namespace

void set_config_value(CohortConfig& c, std::string_view key, std::string_view value)
{
    value = trim(value);
    if (key == "n_students") c.n_students = parse_number<std::size_t>(key, value);
    else if (key == "reviews_per_student") c.reviews_per_student = parse_number<std::size_t>(key, value);
    else if (key == "quality_mean") c.quality_mean = parse_number<double>(key, value);
    else if (key == "quality_sd") c.quality_sd = parse_number<double>(key, value);
    else if (key == "noise_sd_max") c.noise_sd_max = parse_number<double>(key, value);
    else if (key == "noise_sd_min") c.noise_sd_min = parse_number<double>(key, value);
    else if (key == "competence_a") c.competence_a = parse_number<double>(key, value);
    else if (key == "competence_b") c.competence_b = parse_number<double>(key, value);
    else if (key == "bias_mean") c.bias_mean = parse_number<double>(key, value);
    else if (key == "bias_sd") c.bias_sd = parse_number<double>(key, value);
    else if (key == "engagement_coupling") c.engagement_coupling = parse_number<double>(key, value);
    else if (key == "total_lessons") c.total_lessons = parse_number<int>(key, value);
    else if (key == "total_quizzes") c.total_quizzes = parse_number<int>(key, value);
    else if (key == "quiz_noise_sd") c.quiz_noise_sd = parse_number<double>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
}

void apply_config_text(CohortConfig& config, std::string_view text)
{
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
        }
        set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

std::string config_to_text(const CohortConfig& c)
{
    std::string out;
    auto put = [&](std::string_view key, const std::string& value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    put("n_students", std::to_string(c.n_students));
    put("reviews_per_student", std::to_string(c.reviews_per_student));
    put("quality_mean", format_double(c.quality_mean));
    put("quality_sd", format_double(c.quality_sd));
    put("noise_sd_max", format_double(c.noise_sd_max));
    put("noise_sd_min", format_double(c.noise_sd_min));
    put("competence_a", format_double(c.competence_a));
    put("competence_b", format_double(c.competence_b));
    put("bias_mean", format_double(c.bias_mean));
    put("bias_sd", format_double(c.bias_sd));
    put("engagement_coupling", format_double(c.engagement_coupling));
    put("total_lessons", std::to_string(c.total_lessons));
    put("total_quizzes", std::to_string(c.total_quizzes));
    put("quiz_noise_sd", format_double(c.quiz_noise_sd));
    put("seed", std::to_string(c.seed));
    return out;
}

std::vector<ReviewPair> assign_reviews(std::size_t n, std::size_t k, CohortRng& rng)
{
    if (k < 1 || k >= n) {
        throw Error(ErrorCode::InvalidK, "need 1 <= k < n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    std::vector<ReviewPair> pairs;
    pairs.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t offset = 1; offset <= k; ++offset) {
            pairs.push_back({ perm[i], perm[(i + offset) % n] });
        }
    }
    return pairs;
}

std::vector<ReviewPair> assign_reviews(std::size_t n, std::size_t k, std::uint64_t seed)
{
    CohortRng rng(seed);
    return assign_reviews(n, k, rng);
}

std::string student_id(std::size_t index, std::size_t n_students) { return padded('s', index, n_students); }
std::string essay_id(std::size_t index, std::size_t n_students) { return padded('e', index, n_students); }

double round_to_half(double x) { return std::round(2.0 * x) / 2.0; }

SyntheticCohort generate_cohort(const CohortConfig& config)
{
    config.validate();
    const std::size_t n = config.n_students;
    CohortRng rng(config.seed);
    SyntheticCohort cohort;
    cohort.assignments = assign_reviews(n, config.reviews_per_student, rng);

    std::vector<double> bias(n);
    cohort.true_quality.resize(n);
    cohort.competence.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto sid = student_id(i, n);
        const auto eid = essay_id(i, n);
        cohort.true_quality[i] = std::clamp(rng.normal(config.quality_mean, config.quality_sd), 2.0, 10.0);
        const double competence = config.competence_a == 1.0 && config.competence_b == 1.0
            ? rng.uniform01()
            : rng.beta(config.competence_a, config.competence_b);
        cohort.competence[i] = competence;
        bias[i] = rng.normal(config.bias_mean, config.bias_sd);

        const bool coupled = rng.uniform01() < config.engagement_coupling;
        const double independent = rng.uniform01();
        const double fraction = coupled ? competence : independent;
        const auto lessons = static_cast<int>(std::lround(fraction * config.total_lessons));
        cohort.engagement.emplace(sid, EngagementRecord{ sid, lessons, config.total_lessons });

        PerformanceRecord perf{ sid, {}, config.total_quizzes };
        const std::size_t quiz_width = std::to_string(config.total_quizzes).size();
        for (int q = 0; q < config.total_quizzes; ++q) {
            const double raw = std::clamp(100.0 * competence + rng.normal(0.0, config.quiz_noise_sd), 0.0, 100.0);
            auto digits = std::to_string(q + 1);
            perf.quiz_scores.emplace("q" + std::string(quiz_width - digits.size(), '0') + digits,
                                     10.0 * std::round(raw / 10.0));
        }
        cohort.performance.emplace(sid, std::move(perf));

        cohort.authors.emplace(eid, sid);
        cohort.instructor.emplace(eid, rubric_for_grade(round_to_half(cohort.true_quality[i])));
    }

    for (const auto& pair : cohort.assignments) {
        const double sd = config.noise_sd_max
            - (config.noise_sd_max - config.noise_sd_min) * cohort.competence[pair.rater];
        const double observed = cohort.true_quality[pair.essay] + bias[pair.rater] + rng.normal(0.0, sd);
        const double grade = std::clamp(round_to_half(observed), 2.0, 10.0);
        PeerReview review;
        review.essay_id = essay_id(pair.essay, n);
        review.rater_id = student_id(pair.rater, n);
        review.rubric = rubric_for_grade(grade);
        review.grade = rescale_rubric(review.rubric).value();
        cohort.reviews.push_back(std::move(review));
    }

    BuildOptions options;
    options.min_reviews = config.reviews_per_student;
    cohort.dataset = build_dataset(cohort.reviews, cohort.authors, cohort.instructor, cohort.engagement,
                                   cohort.performance, options);
    return cohort;
}

CohortFiles export_cohort(const SyntheticCohort& cohort)
{
    return { write_reviews(cohort.reviews), write_essays(cohort.authors), write_instructor(cohort.instructor),
             write_engagement(cohort.engagement), write_quizzes(cohort.performance) };
}

std::vector<ValidityReport> run_experiment(const CohortConfig& config, std::size_t replications,
                                           const ExperimentOptions& options)
{
    if (replications < 1) {
        throw Error(ErrorCode::InvalidConfig, "replications must be at least 1");
    }
    config.validate();
    std::vector<ValidityReport> reports(replications);
    auto run_one = [&](std::size_t r) {
        CohortConfig replica = config;
        replica.seed = config.seed + r;
        const auto cohort = generate_cohort(replica);
        reports[r] = build_validity_report(cohort.dataset, options.methods, options.schemes, {}, options.plot);
    };

    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, replications);
    if (workers == 1) {
        for (std::size_t r = 0; r < replications; ++r) run_one(r);
        return reports;
    }
    std::atomic<std::size_t> next{ 0 };
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = next++; r < replications; r = next++) run_one(r);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return reports;
}

} // namespace peergrade
