#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

// Normalize a nonnegative vector to sum 1. Throws DomainError if any entry is
// negative, non-finite, or if the sum is zero.
std::vector<double> normalize(std::span<const double> weights);

// Probability distribution over the joint states of a space, or over the
// substates of a clique when scoped. Stored normalized; entries may be zero.
class Belief {
public:
    // Full-joint belief: `table` indexed like OutcomeSpace joint states.
    static Belief full(const OutcomeSpace& space, std::vector<double> table);

    // Clique-scoped belief: `table` indexed like enumerate_clique order.
    static Belief over(Clique scope, const OutcomeSpace& space, std::vector<double> table);

    bool scoped() const { return scope_.has_value(); }
    const Clique& scope() const;

    const std::vector<double>& probabilities() const { return table_; }
    double probability(std::uint64_t index) const;

    // log p; returns -infinity where p == 0.
    double log_probability(std::uint64_t index) const;

    std::uint64_t size() const { return table_.size(); }

    // Marginal over `clique` (must be a full-joint belief).
    std::vector<double> marginal(const Clique& clique, const OutcomeSpace& space) const;

private:
    Belief(std::optional<Clique> scope, std::vector<double> table);

    std::optional<Clique> scope_;
    std::vector<double> table_;
};

// Unnormalized strictly positive factor over a clique, indexed like
// enumerate_clique order.
class FactorTable {
public:
    FactorTable(Clique scope, const OutcomeSpace& space, std::vector<double> values);

    const Clique& scope() const { return scope_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::uint64_t index) const;
    double log_value(std::uint64_t index) const;
    std::uint64_t size() const { return values_.size(); }

    // Factor value at a full joint state (restricts to the scope first).
    double at_joint(const JointState& state, const OutcomeSpace& space) const;

private:
    Clique scope_;
    std::vector<double> values_;
};

enum class UtilityKind {
    LinearDebtFree,      // U(x) = x for x > 0, -infinity otherwise
    Logarithmic,         // U(x) = log x
    ExponentialNegative, // U(x) = -exp(-x)
};

std::string to_string(UtilityKind kind);
UtilityKind utility_kind_from_string(const std::string& name);

// Evaluate the utility at wealth x. Domain violations (x <= 0 for the linear
// and log forms) yield -infinity rather than throwing.
double utility_eval(UtilityKind kind, double x);

// E_P[U(payout)] where payout(k) = wealth + s_k - s.c for joint goods.
// Terms with P(k) == 0 are skipped, so a -infinity utility there is harmless.
double expected_utility(UtilityKind kind, const Belief& belief, std::span<const double> stakes,
                        std::span<const double> prices, double wealth);

// Restricted-good market (one binary bet per variable, paying on y_j = 1):
// -sum_y P(y) exp(-wealth + s.(c - y)) for an exponential agent holding stake
// s_j in the bet on variable j.
double expected_utility_restricted_exp(const Belief& belief, std::span<const double> stakes,
                                       std::span<const double> prices, double wealth,
                                       const OutcomeSpace& space);

} // namespace beliefmarket
