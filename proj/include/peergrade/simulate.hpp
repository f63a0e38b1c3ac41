#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peergrade/dataset.hpp"
#include "peergrade/ingest.hpp"
#include "peergrade/validity.hpp"

namespace peergrade {

/**
 * Seeded random source for cohort generation.
 *
 * Engine: 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is
 * fixed by the C++ standard) seeded with the single 64-bit seed. The derived
 * draws avoid the implementation-defined std distributions:
 *   uniform01  (x >> 11) * 2^-53
 *   normal     Box-Muller, cosine branch, u1 = 1 - uniform01, one output per pair
 *   gamma      Marsaglia-Tsang, shape < 1 via the u^(1/shape) boost
 *   beta       X / (X + Y) from two gamma draws
 *   below(n)   rejection of x >= 2^64 - (2^64 mod n), then x mod n
 */
class CohortRng {
public:
    explicit CohortRng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    double uniform01();
    double normal(double mean = 0.0, double sd = 1.0);
    /// Marsaglia-Tsang squeeze method; shape < 1 boosted by u^(1/shape).
    double gamma(double shape);
    /// X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
    double beta(double a, double b);
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; uniform01=(x>>11)*2^-53; normal=box-muller-cos; gamma=marsaglia-tsang; beta=gamma-ratio; below=rejection-mod";

struct CohortConfig {
    std::size_t n_students = 91;
    std::size_t reviews_per_student = 3;
    // True essay quality ~ Normal(mean, sd) clamped to [2, 10].
    double quality_mean = 7.5;
    double quality_sd = 1.3;
    // Rater i grades with noise sd = noise_sd_max - (noise_sd_max - noise_sd_min) * competence_i,
    // competence ~ Beta(competence_a, competence_b); a = b = 1 is Uniform[0, 1]
    // and is drawn with a single uniform01 call. The defaults give a polarized
    // cohort: many careful raters and a tail of near-random ones.
    double noise_sd_max = 8.0;
    double noise_sd_min = 0.3;
    double competence_a = 0.3;
    double competence_b = 0.15;
    // Per-rater constant offset ~ Normal(bias_mean, bias_sd).
    double bias_mean = 0.0;
    double bias_sd = 0.0;
    // Probability that a student's completed-lesson fraction equals their
    // competence instead of an independent uniform draw.
    double engagement_coupling = 0.8;
    int total_lessons = 7;
    int total_quizzes = 7;
    // Each quiz scores 100 * competence + Normal(0, quiz_noise_sd), clamped
    // to [0, 100] and rounded to a multiple of 10.
    double quiz_noise_sd = 5.0;
    std::uint64_t seed = 42;

    /// Throws INVALID_CONFIG when an invariant fails.
    void validate() const;
};

/// Sets one field from its key=value spelling (the field names above).
/// Throws INVALID_CONFIG on unknown keys or unparsable values.
void set_config_value(CohortConfig& config, std::string_view key, std::string_view value);

/// Applies a flat key=value file: one pair per line, '#' comments, blank lines ignored.
void apply_config_text(CohortConfig& config, std::string_view text);

/// Canonical key=value rendering, one line per field in declaration order.
[[nodiscard]] std::string config_to_text(const CohortConfig& config);

struct ReviewPair {
    std::size_t rater;
    std::size_t essay; // index of the essay's author
    friend bool operator==(const ReviewPair&, const ReviewPair&) = default;
};

/// Circulant assignment over a random permutation p: student p[i] reviews
/// the essays of p[i+1], ..., p[i+k] (indices mod n). Every student gives and
/// receives exactly k reviews, never their own. Throws INVALID_K unless 1 <= k < n.
[[nodiscard]] std::vector<ReviewPair> assign_reviews(std::size_t n, std::size_t k, CohortRng& rng);
[[nodiscard]] std::vector<ReviewPair> assign_reviews(std::size_t n, std::size_t k, std::uint64_t seed);

struct SyntheticCohort {
    ReviewDataset dataset;
    // Raw tables in ingest form; exporting and re-ingesting them rebuilds `dataset`.
    std::vector<PeerReview> reviews;
    Authorship authors;
    InstructorRubrics instructor;
    EngagementTable engagement;
    PerformanceTable performance;
    // Ground truth.
    std::vector<double> true_quality;
    std::vector<double> competence;
    std::vector<ReviewPair> assignments;
};

[[nodiscard]] std::string student_id(std::size_t index, std::size_t n_students);
[[nodiscard]] std::string essay_id(std::size_t index, std::size_t n_students);

/// Nearest multiple of 0.5.
[[nodiscard]] double round_to_half(double x);

[[nodiscard]] SyntheticCohort generate_cohort(const CohortConfig& config);

struct CohortFiles {
    std::string reviews;
    std::string essays;
    std::string instructor;
    std::string engagement;
    std::string quizzes;
};

/// The cohort in the ingest CSV schemas.
[[nodiscard]] CohortFiles export_cohort(const SyntheticCohort& cohort);

struct ExperimentOptions {
    std::vector<AggregationMethod> methods{ std::begin(kAllMethods), std::end(kAllMethods) };
    std::vector<WeightScheme> schemes{ std::begin(kAllSchemes), std::end(kAllSchemes) };
    PlotOptions plot;
    std::size_t threads = 1;
};

/// One report per replication r, generated with seed config.seed + r.
/// Output is independent of the thread count.
[[nodiscard]] std::vector<ValidityReport> run_experiment(const CohortConfig& config, std::size_t replications,
                                                         const ExperimentOptions& options = {});

} // namespace peergrade
