#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace peergrade {

/**
 * Sparse rater x essay matrix of grades normalized to [0, 1].
 *
 * Student j authors essay j, so one index space covers both roles.
 * Self-grades are rejected.
 */
class GradeMatrix {
public:
    struct Entry {
        std::size_t student; // the rater for received(), the essay for given()
        double grade;
    };

    explicit GradeMatrix(std::size_t n_students);

    /// Throws INVALID_GRADE for a grade outside [0, 1], INVALID_CONFIG for a
    /// self-grade, an index out of range or a repeated (rater, essay) pair.
    void add(std::size_t rater, std::size_t essay, double grade);

    [[nodiscard]] std::size_t size() const noexcept { return received_.size(); }
    /// Grades essay j received, ordered by rater index.
    [[nodiscard]] std::span<const Entry> received(std::size_t essay) const { return received_[essay]; }
    /// Grades student i gave, ordered by essay index.
    [[nodiscard]] std::span<const Entry> given(std::size_t rater) const { return given_[rater]; }
    [[nodiscard]] std::optional<double> at(std::size_t rater, std::size_t essay) const;

private:
    std::vector<std::vector<Entry>> received_;
    std::vector<std::vector<Entry>> given_;
};

struct PeerRankConfig {
    double alpha = 0.2;
    double beta = 0.0; // 0 is plain PeerRank; Generalized PeerRank uses beta > 0
    double tolerance = 1e-6;
    int max_iterations = 1000;
    std::optional<double> initial_grade; // constant start instead of the mean received grade

    /// Throws INVALID_CONFIG unless 0 <= alpha < 1, 0 <= beta, alpha + beta < 1,
    /// tolerance > 0 and max_iterations >= 1.
    void validate() const;
};

inline constexpr double kDefaultGeneralizedBeta = 0.1;

struct PeerRankResult {
    std::vector<double> grades;
    int iterations_used = 0;
    bool converged = false;
    double trajectory_max_delta = 0.0; // max |X' - X| of the last step
    std::vector<double> step_deltas;
};

/// Mean grade each essay received. Throws EMPTY_GRADERS for an ungraded essay.
[[nodiscard]] std::vector<double> peerrank_init(const GradeMatrix& matrix);

/**
 * One fixed-point update:
 *
 *   X'_j = X_j + a * (sum_i X_i A_ij / sum_i X_i - X_j)     (i over graders of j)
 *              + b * (mean_k (1 - |A_jk - X_k|) - X_j)       (k over essays j graded)
 *
 * When the graders of j all have grade 0 the received term is X_j; a
 * student who graded nothing has accuracy term X_j. When every grader of j
 * gave the same grade the received term is exactly that grade. The result
 * is clamped to [0, 1].
 */
[[nodiscard]] std::vector<double> peerrank_step(std::span<const double> grades, const GradeMatrix& matrix,
                                                const PeerRankConfig& config);

/// Iterates peerrank_step until max |X' - X| < tolerance or max_iterations.
/// Non-convergence is reported through the result, never thrown.
[[nodiscard]] PeerRankResult peerrank(const GradeMatrix& matrix, const PeerRankConfig& config);

/// Rescales [0, 1] grades to the 0-10 grade scale.
[[nodiscard]] std::vector<double> peerrank_to_grades(const PeerRankResult& result);

} // namespace peergrade
