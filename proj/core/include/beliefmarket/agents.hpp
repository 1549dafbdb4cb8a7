#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefmarket/beliefs.hpp"
#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

enum class AgentStyle {
    FullJoint, // belief over the whole space
    Niche,     // factorial deviation from prices on a clique; exp utility only
    Marginal,  // belief over a clique, trades consistent joint-good bundles; exp only
};

std::string to_string(AgentStyle style);

// A market participant: wealth, utility kind, and one of the three belief
// styles. Niche and Marginal agents must use exponential utility — the only
// case with a closed-form buying function.
class Agent {
public:
    static Agent full_joint(std::string id, double wealth, UtilityKind utility, Belief belief);
    static Agent niche(std::string id, double wealth, FactorTable factor);
    static Agent marginal(std::string id, double wealth, Belief clique_belief);

    const std::string& id() const { return id_; }
    double wealth() const { return wealth_; }
    UtilityKind utility() const { return utility_; }
    AgentStyle style() const { return style_; }

    const Belief& belief() const;       // FullJoint or Marginal
    const FactorTable& factor() const;  // Niche
    const Clique& clique() const;       // Niche or Marginal

private:
    Agent(std::string id, double wealth, UtilityKind utility, AgentStyle style,
          std::optional<Belief> belief, std::optional<FactorTable> factor);

    std::string id_;
    double wealth_;
    UtilityKind utility_;
    AgentStyle style_;
    std::optional<Belief> belief_;
    std::optional<FactorTable> factor_;
};

// Holdings per good; negative entries are short positions.
struct Position {
    std::vector<double> holdings;
};

enum class StandardizationKind {
    ZeroValue,    // s.c = 0
    ZeroLastGood, // s_N = 0
    MinZero,      // min_k s_k = 0
};

// Shift by alpha*1 so the chosen constraint holds. Utility-neutral whenever
// prices sum to 1.
Position standardize(const Position& position, std::span<const double> prices,
                     StandardizationKind kind);

// Stake all wealth on the good maximizing (P(k) - c_k)/c_k; zero position when
// no good has positive edge; ties broken by lowest index. MinZero convention.
Position buy_linear(const Agent& agent, std::span<const double> prices);

// s_k = W (P(k) - c_k)/c_k; satisfies s.c = 0 identically.
Position buy_log(const Agent& agent, std::span<const double> prices);

// s_k = log(P(k)/c_k) - log_lambda with log_lambda = sum_k c_k log(P(k)/c_k);
// wealth-independent, s.c = 0.
Position buy_exp(const Agent& agent, std::span<const double> prices);

// s_k = log F(restrict(k)) - log_lambda over joint goods; depends on k only
// through the clique restriction.
Position buy_niche(const Agent& agent, std::span<const double> prices, const OutcomeSpace& space);

// Per-substate holdings s(y_i) = log(P(y_i)/c(y_i)) - log_lambda with c(y_i)
// the marginal cost of the substate's consistent joint goods.
std::vector<double> buy_marginal(const Agent& agent, std::span<const double> prices,
                                 const OutcomeSpace& space);

// Equal purchase of every joint good consistent with each substate.
Position expand_marginal(std::span<const double> substate_holdings, const Clique& clique,
                         const OutcomeSpace& space, std::uint64_t cap = kDefaultJointStateCap);

// Dispatch on utility and style; returns a joint-good Position.
Position buy(const Agent& agent, std::span<const double> prices, const OutcomeSpace& space);

} // namespace beliefmarket
