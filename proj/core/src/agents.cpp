#include "beliefmarket/agents.hpp"

#include <algorithm>
#include <cmath>

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {

void check_prices(std::span<const double> prices) {
    if (prices.empty()) throw ContractError("price vector is empty");
    for (double c : prices) {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw DomainError("buying functions require strictly positive prices");
        }
    }
}

void check_length(std::span<const double> prices, const Belief& belief) {
    if (prices.size() != belief.size()) {
        throw ContractError("price vector length does not match the belief");
    }
}

} // namespace

std::string to_string(AgentStyle style) {
    switch (style) {
        case AgentStyle::FullJoint: return "full_joint";
        case AgentStyle::Niche: return "niche";
        case AgentStyle::Marginal: return "marginal";
    }
    throw ContractError("unknown agent style");
}

Agent::Agent(std::string id, double wealth, UtilityKind utility, AgentStyle style,
             std::optional<Belief> belief, std::optional<FactorTable> factor)
    : id_(std::move(id)),
      wealth_(wealth),
      utility_(utility),
      style_(style),
      belief_(std::move(belief)),
      factor_(std::move(factor)) {
    if (!(wealth_ > 0.0) || !std::isfinite(wealth_)) {
        throw ContractError("agent '" + id_ + "' needs positive finite wealth");
    }
}

Agent Agent::full_joint(std::string id, double wealth, UtilityKind utility, Belief belief) {
    if (belief.scoped()) {
        throw ContractError("full-joint agent needs an unscoped belief");
    }
    return Agent(std::move(id), wealth, utility, AgentStyle::FullJoint, std::move(belief),
                 std::nullopt);
}

Agent Agent::niche(std::string id, double wealth, FactorTable factor) {
    return Agent(std::move(id), wealth, UtilityKind::ExponentialNegative, AgentStyle::Niche,
                 std::nullopt, std::move(factor));
}

Agent Agent::marginal(std::string id, double wealth, Belief clique_belief) {
    if (!clique_belief.scoped()) {
        throw ContractError("marginal agent needs a clique-scoped belief");
    }
    return Agent(std::move(id), wealth, UtilityKind::ExponentialNegative, AgentStyle::Marginal,
                 std::move(clique_belief), std::nullopt);
}

const Belief& Agent::belief() const {
    if (!belief_) throw ContractError("agent '" + id_ + "' has no belief table");
    return *belief_;
}

const FactorTable& Agent::factor() const {
    if (!factor_) throw ContractError("agent '" + id_ + "' has no factor table");
    return *factor_;
}

const Clique& Agent::clique() const {
    if (factor_) return factor_->scope();
    if (belief_ && belief_->scoped()) return belief_->scope();
    throw ContractError("agent '" + id_ + "' has no clique scope");
}

Position standardize(const Position& position, std::span<const double> prices,
                     StandardizationKind kind) {
    const auto& s = position.holdings;
    if (s.empty()) throw ContractError("cannot standardize an empty position");
    if (s.size() != prices.size()) {
        throw ContractError("position and price lengths differ");
    }
    double alpha = 0.0;
    switch (kind) {
        case StandardizationKind::ZeroValue: {
            double value = 0.0, total = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                value += s[k] * prices[k];
                total += prices[k];
            }
            if (total == 0.0) throw DomainError("degenerate prices: sum is zero");
            alpha = -value / total;
            break;
        }
        case StandardizationKind::ZeroLastGood:
            alpha = -s.back();
            break;
        case StandardizationKind::MinZero:
            alpha = -*std::min_element(s.begin(), s.end());
            break;
    }
    Position out = position;
    for (double& h : out.holdings) h += alpha;
    return out;
}

Position buy_linear(const Agent& agent, std::span<const double> prices) {
    if (agent.utility() != UtilityKind::LinearDebtFree || agent.style() != AgentStyle::FullJoint) {
        throw ContractError("buy_linear requires a full-joint linear agent");
    }
    check_prices(prices);
    const Belief& p = agent.belief();
    check_length(prices, p);
    int best = -1;
    double best_edge = 0.0;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        const double edge = (p.probability(k) - prices[k]) / prices[k];
        if (edge > best_edge) { // strict: ties keep the lowest index
            best_edge = edge;
            best = static_cast<int>(k);
        }
    }
    Position out{std::vector<double>(prices.size(), 0.0)};
    if (best >= 0) {
        out.holdings[static_cast<std::size_t>(best)] = agent.wealth() / prices[static_cast<std::size_t>(best)];
    }
    return out;
}

Position buy_log(const Agent& agent, std::span<const double> prices) {
    if (agent.utility() != UtilityKind::Logarithmic || agent.style() != AgentStyle::FullJoint) {
        throw ContractError("buy_log requires a full-joint log agent");
    }
    check_prices(prices);
    const Belief& p = agent.belief();
    check_length(prices, p);
    Position out{std::vector<double>(prices.size())};
    for (std::size_t k = 0; k < prices.size(); ++k) {
        out.holdings[k] = agent.wealth() * (p.probability(k) - prices[k]) / prices[k];
    }
    return out;
}

Position buy_exp(const Agent& agent, std::span<const double> prices) {
    if (agent.utility() != UtilityKind::ExponentialNegative ||
        agent.style() != AgentStyle::FullJoint) {
        throw ContractError("buy_exp requires a full-joint exp agent");
    }
    check_prices(prices);
    const Belief& p = agent.belief();
    check_length(prices, p);
    std::vector<double> log_ratio(prices.size());
    double log_lambda = 0.0;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (p.probability(k) <= 0.0) {
            throw DomainError("exp buying needs a strictly positive belief (zero at state " +
                              std::to_string(k) + ")");
        }
        log_ratio[k] = std::log(p.probability(k) / prices[k]);
        log_lambda += prices[k] * log_ratio[k];
    }
    Position out{std::move(log_ratio)};
    for (double& h : out.holdings) h -= log_lambda;
    return out;
}

Position buy_niche(const Agent& agent, std::span<const double> prices, const OutcomeSpace& space) {
    if (agent.style() != AgentStyle::Niche) {
        throw ContractError("buy_niche requires a niche agent");
    }
    check_prices(prices);
    if (prices.size() != space.num_joint_states()) {
        throw ContractError("price vector length does not match the joint state count");
    }
    const FactorTable& f = agent.factor();
    const auto map = joint_to_clique_index(f.scope(), space, prices.size());
    std::vector<double> log_f(prices.size());
    double log_lambda = 0.0;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        log_f[k] = f.log_value(map[k]);
        log_lambda += prices[k] * log_f[k];
    }
    Position out{std::move(log_f)};
    for (double& h : out.holdings) h -= log_lambda;
    return out;
}

std::vector<double> buy_marginal(const Agent& agent, std::span<const double> prices,
                                 const OutcomeSpace& space) {
    if (agent.style() != AgentStyle::Marginal) {
        throw ContractError("buy_marginal requires a marginal agent");
    }
    check_prices(prices);
    const Belief& p = agent.belief();
    const Clique& clique = p.scope();
    const auto costs = marginal_costs(prices, clique, space);
    std::vector<double> holdings(costs.size());
    double log_lambda = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (!(costs[i] > 0.0)) {
            throw DomainError("marginal cost is zero for substate " + std::to_string(i));
        }
        if (p.probability(i) <= 0.0) {
            throw DomainError("marginal buying needs a strictly positive belief");
        }
        holdings[i] = std::log(p.probability(i) / costs[i]);
        log_lambda += costs[i] * holdings[i];
    }
    for (double& h : holdings) h -= log_lambda;
    return holdings;
}

Position expand_marginal(std::span<const double> substate_holdings, const Clique& clique,
                         const OutcomeSpace& space, std::uint64_t cap) {
    const auto map = joint_to_clique_index(clique, space, cap);
    if (substate_holdings.size() != clique_state_count(clique, space)) {
        throw ContractError("substate holdings do not match the clique");
    }
    Position out{std::vector<double>(map.size())};
    for (std::uint64_t k = 0; k < map.size(); ++k) {
        out.holdings[k] = substate_holdings[map[k]];
    }
    return out;
}

Position buy(const Agent& agent, std::span<const double> prices, const OutcomeSpace& space) {
    switch (agent.style()) {
        case AgentStyle::FullJoint:
            switch (agent.utility()) {
                case UtilityKind::LinearDebtFree: return buy_linear(agent, prices);
                case UtilityKind::Logarithmic: return buy_log(agent, prices);
                case UtilityKind::ExponentialNegative: return buy_exp(agent, prices);
            }
            throw ContractError("unknown utility kind");
        case AgentStyle::Niche:
            return buy_niche(agent, prices, space);
        case AgentStyle::Marginal: {
            const auto sub = buy_marginal(agent, prices, space);
            return expand_marginal(sub, agent.belief().scope(), space, prices.size());
        }
    }
    throw ContractError("unknown agent style");
}

} // namespace beliefmarket
