#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "beliefmarket/agents.hpp"
#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

// Per-good costs. At equilibrium over a complete good set: entries in (0,1),
// summing to 1 — the no-arbitrage probability measure.
using PriceVector = std::vector<double>;

struct NoArbitrageCheck {
    bool ok = false;
    double deviation = 0.0; // |sum - 1|
};

// True iff |sum(c) - 1| <= 1e-10 and every entry lies in (0,1).
NoArbitrageCheck check_no_arbitrage(std::span<const double> prices);

struct TatonnementParams {
    double step_size = 0.1;
    double tolerance = 1e-9; // max-norm of the clearing residual
    std::uint64_t max_iterations = 100000;
    double damping = 0.5; // multiplicative step decay on rejected updates
};

struct EquilibriumReport {
    PriceVector prices;
    std::vector<Position> positions; // one per agent, input order
    double clearing_residual = 0.0;  // max-norm at the reported prices
    std::uint64_t iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

// Sum of all agents' positions per good, Niche/Marginal expanded to joint
// goods.
std::vector<double> clearing_residual(const std::vector<Agent>& agents,
                                      std::span<const double> prices, const OutcomeSpace& space);

// clearing_residual with the risk-free (all-ones) component projected out:
// z - (c.z)*1. Shifts along 1 are utility-neutral and absorbed by the neutral
// agent, so only this component must vanish when linear agents hold pure-long
// positions.
std::vector<double> neutral_adjusted_residual(std::span<const double> residual,
                                              std::span<const double> prices);

// All-log market: prices are the wealth-weighted mean of beliefs.
EquilibriumReport solve_log_market(const std::vector<Agent>& agents);

// All-exp market: prices are the normalized geometric mean of beliefs,
// computed in log domain; wealths ignored.
EquilibriumReport solve_exp_market(const std::vector<Agent>& agents);

// One full-joint exp base plus niche agents: prices are the normalized
// product of the base distribution with every clique factor.
EquilibriumReport solve_niche_market(const Agent& base, const std::vector<Agent>& niche_agents,
                                     const OutcomeSpace& space,
                                     std::uint64_t cap = kDefaultJointStateCap);

// All-linear market on one binary variable: price of the y=1 good is the
// lower wealth-weighted median of the agents' beliefs.
EquilibriumReport solve_linear_binary(const std::vector<Agent>& agents);

// Iterative price adjustment c <- normalize(c * exp(step * residual)) with
// accept/reject step control. Works for any agent population with defined
// buying functions; reports non-convergence honestly.
EquilibriumReport tatonnement(const std::vector<Agent>& agents, const OutcomeSpace& space,
                              PriceVector init, const TatonnementParams& params = {});

} // namespace beliefmarket
