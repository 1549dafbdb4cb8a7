#include "beliefmarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beliefmarket/equilibrium.hpp"
#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kGridCap = 10'000'000;
}

Position best_response_oracle(const Agent& agent, std::span<const double> prices,
                              const GridSpec& grid) {
    if (agent.style() != AgentStyle::FullJoint) {
        throw ContractError("best_response_oracle handles full-joint agents");
    }
    const std::size_t n = prices.size();
    if (n > 4) throw CapacityError("best_response_oracle handles at most 4 goods");
    if (grid.ranges.size() != n || agent.belief().size() != n) {
        throw ContractError("grid/belief/price dimensions disagree");
    }
    if (!(grid.step > 0.0)) throw ContractError("grid step must be positive");

    std::vector<std::uint64_t> counts(n);
    std::uint64_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        const auto [lo, hi] = grid.ranges[d];
        if (!(lo < hi)) throw ContractError("grid range must have lo < hi");
        counts[d] = static_cast<std::uint64_t>(std::floor((hi - lo) / grid.step + 1e-9)) + 1;
        if (counts[d] == 0) throw ContractError("empty grid");
        if (total > kGridCap / counts[d]) {
            throw CapacityError("grid exceeds 1e7 points");
        }
        total *= counts[d];
    }

    Position point{std::vector<double>(n, 0.0)};
    Position best{std::vector<double>(n, 0.0)};
    double best_utility = kNegInf;
    bool have_best = false;
    std::vector<std::uint64_t> index(n, 0);

    for (std::uint64_t step_count = 0; step_count < total; ++step_count) {
        for (std::size_t d = 0; d < n; ++d) {
            point.holdings[d] = grid.ranges[d][0] + static_cast<double>(index[d]) * grid.step;
        }
        const Position standardized = standardize(point, prices, grid.standardization);
        const double utility = expected_utility(agent.utility(), agent.belief(),
                                                standardized.holdings, prices, agent.wealth());
        if (!have_best || utility > best_utility) {
            have_best = true;
            best_utility = utility;
            best = standardized;
        }
        for (std::size_t d = n; d-- > 0;) { // last good fastest
            if (++index[d] < counts[d]) break;
            index[d] = 0;
        }
    }
    return best;
}

Belief brute_force_joint_product(const OutcomeSpace& space, const std::optional<Belief>& base,
                                 const std::vector<FactorTable>& factors, std::uint64_t cap) {
    const std::uint64_t n = space.num_joint_states();
    if (n > cap) {
        throw CapacityError("joint state count " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
    }
    if (base && (base->scoped() || base->size() != n)) {
        throw ContractError("base must be a full-joint belief over the space");
    }
    std::vector<double> log_table(n, 0.0);
    for (std::uint64_t k = 0; k < n; ++k) {
        const JointState state = space.state_at(k);
        double acc = base ? base->log_probability(k) : 0.0;
        for (const auto& f : factors) {
            const JointState sub = restrict_state(state, f.scope(), space);
            acc += f.log_value(clique_index_of(sub, f.scope(), space));
        }
        log_table[k] = acc;
    }
    const double m = *std::max_element(log_table.begin(), log_table.end());
    if (m == kNegInf) throw DomainError("product has zero mass everywhere");
    std::vector<double> table(n, 0.0);
    for (std::uint64_t k = 0; k < n; ++k) table[k] = std::exp(log_table[k] - m);
    return Belief::full(space, std::move(table));
}

std::vector<Belief> exact_marginals(const Belief& joint, const OutcomeSpace& space) {
    if (joint.scoped() || joint.size() != space.num_joint_states()) {
        throw ContractError("exact_marginals needs a full-joint belief over the space");
    }
    std::vector<Belief> out;
    out.reserve(static_cast<std::size_t>(space.num_variables()));
    for (int j = 0; j < space.num_variables(); ++j) {
        std::vector<double> table(static_cast<std::size_t>(space.variable(j).cardinality), 0.0);
        for (std::uint64_t k = 0; k < joint.size(); ++k) {
            const JointState state = space.state_at(k);
            table[static_cast<std::size_t>(state[static_cast<std::size_t>(j)])] +=
                joint.probability(k);
        }
        out.push_back(Belief::over(Clique({j}), space, std::move(table)));
    }
    return out;
}

std::vector<double> brute_force_equilibrium(const std::vector<Agent>& agents,
                                            const OutcomeSpace& space, double resolution) {
    if (agents.empty()) throw ContractError("brute_force_equilibrium needs agents");
    const std::uint64_t goods = space.num_joint_states();
    if (goods > 3) throw CapacityError("brute_force_equilibrium handles at most 3 goods");
    if (!(resolution >= 1e-3)) {
        throw CapacityError("grid resolution finer than 1e-3 refused");
    }
    const auto steps = static_cast<std::int64_t>(std::llround(1.0 / resolution));
    if (steps < static_cast<std::int64_t>(goods)) {
        throw ContractError("resolution too coarse for strictly positive prices");
    }

    const bool has_linear = std::any_of(agents.begin(), agents.end(), [](const Agent& a) {
        return a.utility() == UtilityKind::LinearDebtFree;
    });

    auto residual_norm = [&](const std::vector<double>& c) {
        std::vector<double> z = clearing_residual(agents, c, space);
        if (has_linear) z = neutral_adjusted_residual(z, c);
        double m = 0.0;
        for (double x : z) m = std::max(m, std::abs(x));
        return m;
    };

    std::vector<double> best;
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<double> c(goods);
    const double unit = 1.0 / static_cast<double>(steps);

    auto consider = [&](const std::vector<double>& candidate) {
        const double norm = residual_norm(candidate);
        if (norm < best_norm) { // strict: ties keep the earlier grid point
            best_norm = norm;
            best = candidate;
        }
    };

    if (goods == 2) {
        for (std::int64_t i = 1; i < steps; ++i) {
            c[0] = static_cast<double>(i) * unit;
            c[1] = static_cast<double>(steps - i) * unit;
            consider(c);
        }
    } else if (goods == 3) {
        for (std::int64_t i = 1; i < steps - 1; ++i) {
            for (std::int64_t j = 1; j < steps - i; ++j) {
                c[0] = static_cast<double>(i) * unit;
                c[1] = static_cast<double>(j) * unit;
                c[2] = static_cast<double>(steps - i - j) * unit;
                consider(c);
            }
        }
    } else {
        throw ContractError("brute_force_equilibrium needs at least two goods");
    }
    return best;
}

} // namespace beliefmarket
