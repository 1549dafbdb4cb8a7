#include "beliefmarket/beliefs.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<double> normalize(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw DomainError("normalize requires finite nonnegative entries");
        }
        total += w;
    }
    if (total <= 0.0) {
        throw DomainError("normalize requires a positive total");
    }
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= total;
    return out;
}

Belief::Belief(std::optional<Clique> scope, std::vector<double> table)
    : scope_(std::move(scope)), table_(std::move(table)) {}

Belief Belief::full(const OutcomeSpace& space, std::vector<double> table) {
    if (table.size() != space.num_joint_states()) {
        throw ContractError("belief table has " + std::to_string(table.size()) +
                            " entries, space has " + std::to_string(space.num_joint_states()) +
                            " joint states");
    }
    return Belief(std::nullopt, normalize(table));
}

Belief Belief::over(Clique scope, const OutcomeSpace& space, std::vector<double> table) {
    const std::uint64_t n = clique_state_count(scope, space);
    if (table.size() != n) {
        throw ContractError("belief table has " + std::to_string(table.size()) +
                            " entries, clique has " + std::to_string(n) + " substates");
    }
    return Belief(std::move(scope), normalize(table));
}

const Clique& Belief::scope() const {
    if (!scope_) throw ContractError("belief is not clique-scoped");
    return *scope_;
}

double Belief::probability(std::uint64_t index) const {
    if (index >= table_.size()) throw ContractError("belief index out of range");
    return table_[index];
}

double Belief::log_probability(std::uint64_t index) const {
    const double p = probability(index);
    return p > 0.0 ? std::log(p) : kNegInf;
}

std::vector<double> Belief::marginal(const Clique& clique, const OutcomeSpace& space) const {
    if (scoped()) throw ContractError("marginal requires a full-joint belief");
    if (table_.size() != space.num_joint_states()) {
        throw ContractError("belief does not match the space");
    }
    const auto map = joint_to_clique_index(clique, space, table_.size());
    std::vector<double> out(clique_state_count(clique, space), 0.0);
    for (std::uint64_t k = 0; k < map.size(); ++k) {
        out[map[k]] += table_[k];
    }
    return out;
}

FactorTable::FactorTable(Clique scope, const OutcomeSpace& space, std::vector<double> values)
    : scope_(std::move(scope)), values_(std::move(values)) {
    const std::uint64_t n = clique_state_count(scope_, space);
    if (values_.size() != n) {
        throw ContractError("factor table has " + std::to_string(values_.size()) +
                            " entries, clique has " + std::to_string(n) + " substates");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw DomainError("factor entries must be finite and strictly positive");
        }
    }
}

double FactorTable::value(std::uint64_t index) const {
    if (index >= values_.size()) throw ContractError("factor index out of range");
    return values_[index];
}

double FactorTable::log_value(std::uint64_t index) const { return std::log(value(index)); }

double FactorTable::at_joint(const JointState& state, const OutcomeSpace& space) const {
    const JointState sub = restrict_state(state, scope_, space);
    return value(clique_index_of(sub, scope_, space));
}

std::string to_string(UtilityKind kind) {
    switch (kind) {
        case UtilityKind::LinearDebtFree: return "linear";
        case UtilityKind::Logarithmic: return "log";
        case UtilityKind::ExponentialNegative: return "exp";
    }
    throw ContractError("unknown utility kind");
}

UtilityKind utility_kind_from_string(const std::string& name) {
    if (name == "linear") return UtilityKind::LinearDebtFree;
    if (name == "log") return UtilityKind::Logarithmic;
    if (name == "exp") return UtilityKind::ExponentialNegative;
    throw ParseError("unknown utility kind '" + name + "' (expected linear, log, or exp)");
}

double utility_eval(UtilityKind kind, double x) {
    switch (kind) {
        case UtilityKind::LinearDebtFree:
            return x > 0.0 ? x : kNegInf;
        case UtilityKind::Logarithmic:
            return x > 0.0 ? std::log(x) : kNegInf;
        case UtilityKind::ExponentialNegative:
            return -std::exp(-x);
    }
    throw ContractError("unknown utility kind");
}

double expected_utility(UtilityKind kind, const Belief& belief, std::span<const double> stakes,
                        std::span<const double> prices, double wealth) {
    if (belief.scoped()) throw ContractError("expected_utility requires a full-joint belief");
    if (stakes.size() != belief.size() || prices.size() != belief.size()) {
        throw ContractError("stakes/prices length does not match the belief");
    }
    double cost = 0.0;
    for (std::size_t k = 0; k < stakes.size(); ++k) cost += stakes[k] * prices[k];
    double eu = 0.0;
    for (std::size_t k = 0; k < stakes.size(); ++k) {
        const double p = belief.probability(k);
        if (p == 0.0) continue; // impossible outcomes contribute nothing
        eu += p * utility_eval(kind, wealth + stakes[k] - cost);
    }
    return eu;
}

double expected_utility_restricted_exp(const Belief& belief, std::span<const double> stakes,
                                       std::span<const double> prices, double wealth,
                                       const OutcomeSpace& space) {
    if (belief.scoped()) throw ContractError("restricted expected utility needs a full-joint belief");
    if (!space.all_binary()) throw ContractError("restricted market requires binary variables");
    if (belief.size() != space.num_joint_states() ||
        stakes.size() != static_cast<std::size_t>(space.num_variables()) ||
        prices.size() != stakes.size()) {
        throw ContractError("stakes/prices must have one entry per variable");
    }
    double eu = 0.0;
    for (std::uint64_t k = 0; k < belief.size(); ++k) {
        const double p = belief.probability(k);
        if (p == 0.0) continue;
        const JointState y = space.state_at(k);
        double exponent = -wealth;
        for (std::size_t j = 0; j < stakes.size(); ++j) {
            exponent += stakes[j] * (prices[j] - static_cast<double>(y[j]));
        }
        eu -= p * std::exp(exponent);
    }
    return eu;
}

} // namespace beliefmarket
