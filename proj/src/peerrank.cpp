#include "peergrade/peerrank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peergrade/error.hpp"

namespace peergrade {

namespace {

    // The common grade when every entry agrees.
    std::optional<double> agreed_grade(std::span<const GradeMatrix::Entry> entries)
    {
        if (entries.empty()) return std::nullopt;
        for (const auto& e : entries) {
            if (e.grade != entries.front().grade) return std::nullopt;
        }
        return entries.front().grade;
    }

} // namespace

GradeMatrix::GradeMatrix(std::size_t n_students)
    : received_(n_students)
    , given_(n_students)
{
}

void GradeMatrix::add(std::size_t rater, std::size_t essay, double grade)
{
    if (rater >= size() || essay >= size()) {
        throw Error(ErrorCode::InvalidConfig, "student index out of range");
    }
    if (rater == essay) {
        throw Error(ErrorCode::InvalidConfig, "student " + std::to_string(rater) + " cannot grade their own essay");
    }
    if (!std::isfinite(grade) || grade < 0.0 || grade > 1.0) {
        throw Error(ErrorCode::InvalidGrade, "normalized grade " + std::to_string(grade) + " outside [0, 1]");
    }
    auto by_student = [](const Entry& e, std::size_t s) { return e.student < s; };
    auto& column = received_[essay];
    auto pos = std::lower_bound(column.begin(), column.end(), rater, by_student);
    if (pos != column.end() && pos->student == rater) {
        throw Error(ErrorCode::InvalidConfig,
                    "duplicate grade from " + std::to_string(rater) + " for essay " + std::to_string(essay));
    }
    column.insert(pos, { rater, grade });
    auto& row = given_[rater];
    row.insert(std::lower_bound(row.begin(), row.end(), essay, by_student), { essay, grade });
}

std::optional<double> GradeMatrix::at(std::size_t rater, std::size_t essay) const
{
    for (const auto& e : received_.at(essay)) {
        if (e.student == rater) {
            return e.grade;
        }
    }
    return std::nullopt;
}

void PeerRankConfig::validate() const
{
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1)");
    }
    if (!(beta >= 0.0 && alpha + beta < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "beta must lie in [0, 1 - alpha)");
    }
    if (!(tolerance > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "tolerance must be positive");
    }
    if (max_iterations < 1) {
        throw Error(ErrorCode::InvalidConfig, "max_iterations must be at least 1");
    }
    if (initial_grade && !(*initial_grade >= 0.0 && *initial_grade <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "initial grade must lie in [0, 1]");
    }
}

std::vector<double> peerrank_init(const GradeMatrix& matrix)
{
    std::vector<double> grades(matrix.size());
    for (std::size_t j = 0; j < matrix.size(); ++j) {
        const auto received = matrix.received(j);
        if (received.empty()) {
            throw Error(ErrorCode::EmptyGraders, "essay " + std::to_string(j) + " has no grader");
        }
        if (auto agreed = agreed_grade(received)) {
            grades[j] = *agreed;
            continue;
        }
        double sum = 0.0;
        for (const auto& e : received) {
            sum += e.grade;
        }
        grades[j] = sum / static_cast<double>(received.size());
    }
    return grades;
}

std::vector<double> peerrank_step(std::span<const double> grades, const GradeMatrix& matrix,
                                  const PeerRankConfig& config)
{
    if (grades.size() != matrix.size()) {
        throw Error(ErrorCode::LengthMismatch, "grade vector does not match the matrix size");
    }
    std::vector<double> next(grades.size());
    for (std::size_t j = 0; j < grades.size(); ++j) {
        double weighted = 0.0;
        double weight_total = 0.0;
        for (const auto& e : matrix.received(j)) {
            weighted += grades[e.student] * e.grade;
            weight_total += grades[e.student];
        }
        double received_term = weight_total > 0.0 ? weighted / weight_total : grades[j];
        if (weight_total > 0.0) {
            if (auto agreed = agreed_grade(matrix.received(j))) received_term = *agreed;
        }

        double accuracy_term = grades[j];
        if (config.beta > 0.0 && !matrix.given(j).empty()) {
            double accuracy = 0.0;
            for (const auto& e : matrix.given(j)) {
                accuracy += 1.0 - std::abs(e.grade - grades[e.student]);
            }
            accuracy_term = accuracy / static_cast<double>(matrix.given(j).size());
        }

        // Written as moves away from X_j so a consensus grade is reproduced exactly.
        double value = grades[j] + config.alpha * (received_term - grades[j]);
        if (config.beta > 0.0) {
            value += config.beta * (accuracy_term - grades[j]);
        }
        next[j] = std::clamp(value, 0.0, 1.0);
    }
    return next;
}

PeerRankResult peerrank(const GradeMatrix& matrix, const PeerRankConfig& config)
{
    config.validate();
    PeerRankResult result;
    result.grades = config.initial_grade ? std::vector<double>(matrix.size(), *config.initial_grade)
                                         : peerrank_init(matrix);
    if (config.initial_grade) {
        // Still reject ungraded essays so both starts share one precondition.
        (void)peerrank_init(matrix);
    }
    while (result.iterations_used < config.max_iterations) {
        auto next = peerrank_step(result.grades, matrix, config);
        double delta = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
            delta = std::max(delta, std::abs(next[j] - result.grades[j]));
        }
        result.grades = std::move(next);
        ++result.iterations_used;
        result.trajectory_max_delta = delta;
        result.step_deltas.push_back(delta);
        if (delta < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::vector<double> peerrank_to_grades(const PeerRankResult& result)
{
    std::vector<double> out;
    out.reserve(result.grades.size());
    for (double g : result.grades) {
        out.push_back(g * 10.0);
    }
    return out;
}

} // namespace peergrade
