#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "beliefmarket/agents.hpp"
#include "beliefmarket/beliefs.hpp"
#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

// Brute-force validators, deliberately naive and arithmetically independent
// of the closed forms they check.

struct GridSpec {
    std::vector<std::array<double, 2>> ranges; // [lo, hi] per good
    double step = 0.01;
    StandardizationKind standardization = StandardizationKind::ZeroValue;
};

// Exhaustive expected-utility maximization over the grid; each point is
// standardized before evaluation. Refuses grids above 1e7 points. Ties keep
// the first point in iteration order (last good fastest).
Position best_response_oracle(const Agent& agent, std::span<const double> prices,
                              const GridSpec& grid);

// Multiply the base (uniform when absent) by every factor at each joint
// state's clique restriction; log-domain; normalized.
Belief brute_force_joint_product(const OutcomeSpace& space, const std::optional<Belief>& base,
                                 const std::vector<FactorTable>& factors,
                                 std::uint64_t cap = kDefaultJointStateCap);

// Per-variable marginals of a full-joint belief, by exhaustive summation;
// result j is scoped over variable j alone.
std::vector<Belief> exact_marginals(const Belief& joint, const OutcomeSpace& space);

// Simplex grid search minimizing the max-norm clearing residual (neutral-
// adjusted when linear agents are present). Refuses > 3 goods or resolution
// finer than 1e-3. Ties keep the first grid point in iteration order.
std::vector<double> brute_force_equilibrium(const std::vector<Agent>& agents,
                                            const OutcomeSpace& space, double resolution);

} // namespace beliefmarket
