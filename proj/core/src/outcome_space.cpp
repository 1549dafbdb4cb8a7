#include "beliefmarket/outcome_space.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

OutcomeSpace::OutcomeSpace(std::vector<Variable> variables) : variables_(std::move(variables)) {
    if (variables_.empty()) {
        throw ContractError("outcome space needs at least one variable");
    }
    std::set<std::string> seen;
    for (const auto& v : variables_) {
        if (v.name.empty()) {
            throw ContractError("variable names must be nonempty");
        }
        if (v.cardinality < 2) {
            throw ContractError("variable '" + v.name + "' must have cardinality >= 2, got " +
                                std::to_string(v.cardinality));
        }
        if (!seen.insert(v.name).second) {
            throw ContractError("duplicate variable name '" + v.name + "'");
        }
        const auto card = static_cast<std::uint64_t>(v.cardinality);
        if (num_joint_states_ > std::numeric_limits<std::uint64_t>::max() / card) {
            throw CapacityError("joint state count overflows 64 bits");
        }
        num_joint_states_ *= card;
    }
}

int OutcomeSpace::find_variable(std::string_view name) const {
    for (int j = 0; j < num_variables(); ++j) {
        if (variables_[static_cast<std::size_t>(j)].name == name) return j;
    }
    return -1;
}

bool OutcomeSpace::all_binary() const {
    return std::all_of(variables_.begin(), variables_.end(),
                       [](const Variable& v) { return v.cardinality == 2; });
}

JointState OutcomeSpace::state_at(std::uint64_t k) const {
    if (k >= num_joint_states_) {
        throw ContractError("joint index " + std::to_string(k) + " out of range");
    }
    JointState state(variables_.size());
    // Last variable fastest: peel digits from the right.
    for (int j = num_variables() - 1; j >= 0; --j) {
        const auto card = static_cast<std::uint64_t>(variables_[static_cast<std::size_t>(j)].cardinality);
        state[static_cast<std::size_t>(j)] = static_cast<int>(k % card);
        k /= card;
    }
    return state;
}

std::uint64_t OutcomeSpace::index_of(const JointState& state) const {
    if (state.size() != variables_.size()) {
        throw ContractError("assignment has " + std::to_string(state.size()) + " values, space has " +
                            std::to_string(variables_.size()) + " variables");
    }
    std::uint64_t k = 0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const int card = variables_[j].cardinality;
        if (state[j] < 0 || state[j] >= card) {
            throw ContractError("value " + std::to_string(state[j]) + " out of range for variable '" +
                                variables_[j].name + "'");
        }
        k = k * static_cast<std::uint64_t>(card) + static_cast<std::uint64_t>(state[j]);
    }
    return k;
}

Clique::Clique(std::vector<int> members) : members_(std::move(members)) {
    if (members_.empty()) {
        throw ContractError("clique must be nonempty");
    }
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
        throw ContractError("clique contains duplicate variable indices");
    }
    if (members_.front() < 0) {
        throw ContractError("clique contains a negative variable index");
    }
}

bool Clique::contains(int variable) const {
    return std::binary_search(members_.begin(), members_.end(), variable);
}

void Clique::check_within(const OutcomeSpace& space) const {
    if (members_.back() >= space.num_variables()) {
        throw ContractError("clique member " + std::to_string(members_.back()) +
                            " is outside the space (" + std::to_string(space.num_variables()) +
                            " variables)");
    }
}

std::uint64_t clique_state_count(const Clique& clique, const OutcomeSpace& space) {
    clique.check_within(space);
    std::uint64_t n = 1;
    for (int j : clique.members()) {
        n *= static_cast<std::uint64_t>(space.variable(j).cardinality);
    }
    return n;
}

std::vector<JointState> enumerate_clique(const Clique& clique, const OutcomeSpace& space) {
    const std::uint64_t n = clique_state_count(clique, space);
    std::vector<JointState> out;
    out.reserve(n);
    const int m = clique.size();
    JointState sub(static_cast<std::size_t>(m), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        out.push_back(sub);
        // Increment with the last member fastest.
        for (int d = m - 1; d >= 0; --d) {
            const int card = space.variable(clique.members()[static_cast<std::size_t>(d)]).cardinality;
            if (++sub[static_cast<std::size_t>(d)] < card) break;
            sub[static_cast<std::size_t>(d)] = 0;
        }
    }
    return out;
}

std::uint64_t clique_index_of(const JointState& substate, const Clique& clique,
                              const OutcomeSpace& space) {
    clique.check_within(space);
    if (substate.size() != static_cast<std::size_t>(clique.size())) {
        throw ContractError("substate length does not match clique size");
    }
    std::uint64_t idx = 0;
    for (int d = 0; d < clique.size(); ++d) {
        const int card = space.variable(clique.members()[static_cast<std::size_t>(d)]).cardinality;
        const int v = substate[static_cast<std::size_t>(d)];
        if (v < 0 || v >= card) {
            throw DomainError("substate value " + std::to_string(v) + " out of range for variable '" +
                              space.variable(clique.members()[static_cast<std::size_t>(d)]).name + "'");
        }
        idx = idx * static_cast<std::uint64_t>(card) + static_cast<std::uint64_t>(v);
    }
    return idx;
}

std::vector<std::uint64_t> joint_to_clique_index(const Clique& clique, const OutcomeSpace& space,
                                                 std::uint64_t cap) {
    clique.check_within(space);
    const std::uint64_t n = space.num_joint_states();
    if (n > cap) {
        throw CapacityError("joint state count " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
    }
    std::vector<std::uint64_t> map(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const JointState state = space.state_at(k);
        std::uint64_t idx = 0;
        for (int j : clique.members()) {
            idx = idx * static_cast<std::uint64_t>(space.variable(j).cardinality) +
                  static_cast<std::uint64_t>(state[static_cast<std::size_t>(j)]);
        }
        map[k] = idx;
    }
    return map;
}

std::vector<JointState> enumerate_joint(const OutcomeSpace& space, std::uint64_t cap) {
    const std::uint64_t n = space.num_joint_states();
    if (n > cap) {
        throw CapacityError("joint state count " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
    }
    std::vector<JointState> out;
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        out.push_back(space.state_at(k));
    }
    return out;
}

JointState restrict_state(const JointState& state, const Clique& clique,
                          const OutcomeSpace& space) {
    clique.check_within(space);
    if (state.size() != static_cast<std::size_t>(space.num_variables())) {
        throw ContractError("state length does not match the space");
    }
    JointState sub;
    sub.reserve(static_cast<std::size_t>(clique.size()));
    for (int j : clique.members()) {
        sub.push_back(state[static_cast<std::size_t>(j)]);
    }
    return sub;
}

std::vector<JointState> consistent_states(const JointState& substate, const Clique& clique,
                                          const OutcomeSpace& space, std::uint64_t cap) {
    // Validates the substate values up front.
    const std::uint64_t target = clique_index_of(substate, clique, space);
    const auto map = joint_to_clique_index(clique, space, cap);
    std::vector<JointState> out;
    for (std::uint64_t k = 0; k < map.size(); ++k) {
        if (map[k] == target) out.push_back(space.state_at(k));
    }
    return out;
}

double marginal_cost(std::span<const double> prices, const Clique& clique,
                     const JointState& substate, const OutcomeSpace& space) {
    if (prices.size() != space.num_joint_states()) {
        throw ContractError("price vector length does not match the joint state count");
    }
    const std::uint64_t target = clique_index_of(substate, clique, space);
    const auto map = joint_to_clique_index(clique, space, prices.size());
    double total = 0.0;
    for (std::uint64_t k = 0; k < map.size(); ++k) {
        if (map[k] == target) total += prices[k];
    }
    return total;
}

std::vector<double> marginal_costs(std::span<const double> prices, const Clique& clique,
                                   const OutcomeSpace& space) {
    if (prices.size() != space.num_joint_states()) {
        throw ContractError("price vector length does not match the joint state count");
    }
    const auto map = joint_to_clique_index(clique, space, prices.size());
    std::vector<double> out(clique_state_count(clique, space), 0.0);
    for (std::uint64_t k = 0; k < map.size(); ++k) {
        out[map[k]] += prices[k];
    }
    return out;
}

std::string Good::label(const OutcomeSpace& space) const {
    std::ostringstream os;
    switch (kind) {
        case Kind::JointBet: {
            os << '(';
            for (std::size_t j = 0; j < state.size(); ++j) {
                if (j > 0) os << ',';
                os << state[j];
            }
            os << ')';
            break;
        }
        case Kind::MarginalBet: {
            for (std::size_t d = 0; d < scope.size(); ++d) {
                if (d > 0) os << ',';
                os << space.variable(scope[d]).name << '=' << state[d];
            }
            break;
        }
        case Kind::SingleVarBet: {
            os << space.variable(scope.at(0)).name << '=' << value;
            break;
        }
    }
    return os.str();
}

std::vector<Good> joint_goods(const OutcomeSpace& space, std::uint64_t cap) {
    auto states = enumerate_joint(space, cap);
    std::vector<Good> goods;
    goods.reserve(states.size());
    for (auto& s : states) {
        goods.push_back(Good{Good::Kind::JointBet, std::move(s), {}, 1});
    }
    return goods;
}

std::vector<Good> single_var_goods(const OutcomeSpace& space) {
    if (!space.all_binary()) {
        throw ContractError("single-variable bets require every variable binary");
    }
    std::vector<Good> goods;
    goods.reserve(static_cast<std::size_t>(space.num_variables()));
    for (int j = 0; j < space.num_variables(); ++j) {
        goods.push_back(Good{Good::Kind::SingleVarBet, {}, {j}, 1});
    }
    return goods;
}

} // namespace beliefmarket
