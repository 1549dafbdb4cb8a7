#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beliefmarket {

/// One discrete variable of the outcome space.
struct Variable {
    std::string name;
    int cardinality = 0;
};

/// A joint assignment: one value index per variable, in variable order.
using JointState = std::vector<int>;

/// Default cap on the number of joint states a market may enumerate.
/// The joint count grows as the product of cardinalities, so anything past
/// this is refused instead of silently allocated.
inline constexpr std::uint64_t kDefaultJointStateCap = std::uint64_t{1} << 20;

/// A finite multivariate outcome space. Joint states are ordered row-major
/// with the last declared variable varying fastest; that order defines the
/// good index k used everywhere else. Immutable after construction.
class OutcomeSpace {
  public:
    explicit OutcomeSpace(std::vector<Variable> variables);

    int num_variables() const { return static_cast<int>(variables_.size()); }
    const Variable& variable(int j) const { return variables_.at(static_cast<std::size_t>(j)); }
    const std::vector<Variable>& variables() const { return variables_; }
    std::uint64_t num_joint_states() const { return num_joint_states_; }

    /// Index of the named variable, -1 if absent.
    int find_variable(std::string_view name) const;

    bool all_binary() const;

    /// Decode a joint index into an assignment (last variable fastest).
    JointState state_at(std::uint64_t k) const;

    /// Inverse of state_at. Throws ContractError on out-of-range values.
    std::uint64_t index_of(const JointState& state) const;

  private:
    std::vector<Variable> variables_;
    std::uint64_t num_joint_states_ = 1;
};

/// A sorted, duplicate-free, nonempty subset of variable indices.
class Clique {
  public:
    explicit Clique(std::vector<int> members);

    const std::vector<int>& members() const { return members_; }
    int size() const { return static_cast<int>(members_.size()); }
    bool contains(int variable) const;

    /// Throws ContractError if any member index is outside the space.
    void check_within(const OutcomeSpace& space) const;

    bool operator==(const Clique& other) const { return members_ == other.members_; }

  private:
    std::vector<int> members_;
};

/// Number of sub-states of a clique (product of member cardinalities).
std::uint64_t clique_state_count(const Clique& clique, const OutcomeSpace& space);

/// All sub-assignments of the clique, in member order, last member fastest.
std::vector<JointState> enumerate_clique(const Clique& clique, const OutcomeSpace& space);

/// Index of a sub-assignment under the enumerate_clique order.
std::uint64_t clique_index_of(const JointState& substate, const Clique& clique,
                              const OutcomeSpace& space);

/// Maps each joint index k to the index of its restriction to the clique.
/// The workhorse behind niche factors and marginal bets.
std::vector<std::uint64_t> joint_to_clique_index(const Clique& clique, const OutcomeSpace& space,
                                                 std::uint64_t cap = kDefaultJointStateCap);

/// All joint states in canonical order. Refuses spaces past `cap`.
std::vector<JointState> enumerate_joint(const OutcomeSpace& space,
                                        std::uint64_t cap = kDefaultJointStateCap);

/// The sub-assignment of `state` on the clique, in member order.
JointState restrict_state(const JointState& state, const Clique& clique,
                          const OutcomeSpace& space);

/// Every joint state whose restriction to `clique` equals `substate`.
std::vector<JointState> consistent_states(const JointState& substate, const Clique& clique,
                                          const OutcomeSpace& space,
                                          std::uint64_t cap = kDefaultJointStateCap);

/// Cost of a bet on the marginal outcome `substate`: the sum of the costs of
/// all joint goods consistent with it. `prices` holds one cost per joint state.
double marginal_cost(std::span<const double> prices, const Clique& clique,
                     const JointState& substate, const OutcomeSpace& space);

/// Costs of bets on every sub-state of the clique, in enumerate_clique order.
/// Sums to the total of `prices`.
std::vector<double> marginal_costs(std::span<const double> prices, const Clique& clique,
                                   const OutcomeSpace& space);

/// A tradable bet paying one currency unit. Used to label prices in reports.
struct Good {
    enum class Kind { JointBet, MarginalBet, SingleVarBet };

    Kind kind = Kind::JointBet;
    JointState state;        // JointBet: full assignment; MarginalBet: substate
    std::vector<int> scope;  // MarginalBet: clique members; SingleVarBet: {variable}
    int value = 1;           // SingleVarBet: the value bet on (always 1 here)

    std::string label(const OutcomeSpace& space) const;
};

/// One JointBet per joint state, in canonical order.
std::vector<Good> joint_goods(const OutcomeSpace& space,
                              std::uint64_t cap = kDefaultJointStateCap);

/// One bet on y_j = 1 per variable. Requires every variable binary.
std::vector<Good> single_var_goods(const OutcomeSpace& space);

} // namespace beliefmarket
