#include "beliefmarket/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {

double max_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double two_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// log(sum(exp(v))) with max subtraction.
double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

std::vector<double> sum_positions(const std::vector<Position>& positions, std::size_t n_goods) {
    std::vector<double> total(n_goods, 0.0);
    for (const auto& p : positions) {
        if (p.holdings.size() != n_goods) {
            throw ContractError("position length does not match the good count");
        }
        for (std::size_t k = 0; k < n_goods; ++k) total[k] += p.holdings[k];
    }
    return total;
}

void require_homogeneous(const std::vector<Agent>& agents, UtilityKind kind, const char* what) {
    if (agents.empty()) throw ContractError(std::string(what) + " needs at least one agent");
    const std::uint64_t n = agents.front().style() == AgentStyle::FullJoint
                                ? agents.front().belief().size()
                                : 0;
    for (const auto& a : agents) {
        if (a.style() != AgentStyle::FullJoint || a.utility() != kind) {
            throw ContractError(std::string(what) + ": agent '" + a.id() + "' is not a full-joint " +
                                to_string(kind) + " agent");
        }
        if (a.belief().size() != n) {
            throw ContractError(std::string(what) + ": agents disagree on the good count");
        }
    }
}

} // namespace

NoArbitrageCheck check_no_arbitrage(std::span<const double> prices) {
    double sum = 0.0;
    bool in_range = !prices.empty();
    for (double c : prices) {
        sum += c;
        if (!(c > 0.0 && c < 1.0)) in_range = false;
    }
    const double deviation = std::abs(sum - 1.0);
    return NoArbitrageCheck{in_range && deviation <= 1e-10, deviation};
}

std::vector<double> clearing_residual(const std::vector<Agent>& agents,
                                      std::span<const double> prices, const OutcomeSpace& space) {
    std::vector<double> total(prices.size(), 0.0);
    for (const auto& a : agents) {
        const Position p = buy(a, prices, space);
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += p.holdings[k];
    }
    return total;
}

std::vector<double> neutral_adjusted_residual(std::span<const double> residual,
                                              std::span<const double> prices) {
    if (residual.size() != prices.size()) {
        throw ContractError("residual and price lengths differ");
    }
    double value = 0.0;
    for (std::size_t k = 0; k < residual.size(); ++k) value += prices[k] * residual[k];
    std::vector<double> out(residual.begin(), residual.end());
    for (double& z : out) z -= value;
    return out;
}

EquilibriumReport solve_log_market(const std::vector<Agent>& agents) {
    require_homogeneous(agents, UtilityKind::Logarithmic, "solve_log_market");
    const std::size_t n = agents.front().belief().size();
    double total_wealth = 0.0;
    for (const auto& a : agents) total_wealth += a.wealth();

    EquilibriumReport report;
    report.prices.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (const auto& a : agents) acc += a.wealth() * a.belief().probability(k);
        report.prices[k] = acc / total_wealth;
    }
    for (const auto& a : agents) report.positions.push_back(buy_log(a, report.prices));
    report.clearing_residual = max_norm(sum_positions(report.positions, n));
    report.iterations = 1;
    report.converged = report.clearing_residual <= 1e-12;
    return report;
}

EquilibriumReport solve_exp_market(const std::vector<Agent>& agents) {
    require_homogeneous(agents, UtilityKind::ExponentialNegative, "solve_exp_market");
    const std::size_t n = agents.front().belief().size();
    const double inv_n_agents = 1.0 / static_cast<double>(agents.size());

    std::vector<double> log_price(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (const auto& a : agents) {
            const double p = a.belief().probability(k);
            if (p <= 0.0) {
                throw DomainError("solve_exp_market: agent '" + a.id() +
                                  "' has a zero belief entry");
            }
            log_price[k] += inv_n_agents * std::log(p);
        }
    }
    const double log_z = log_sum_exp(log_price);

    EquilibriumReport report;
    report.prices.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) report.prices[k] = std::exp(log_price[k] - log_z);
    for (const auto& a : agents) report.positions.push_back(buy_exp(a, report.prices));
    report.clearing_residual = max_norm(sum_positions(report.positions, n));
    report.iterations = 1;
    report.converged = report.clearing_residual <= 1e-10;
    return report;
}

EquilibriumReport solve_niche_market(const Agent& base, const std::vector<Agent>& niche_agents,
                                     const OutcomeSpace& space, std::uint64_t cap) {
    if (base.style() != AgentStyle::FullJoint ||
        base.utility() != UtilityKind::ExponentialNegative) {
        throw ContractError("solve_niche_market: base must be a full-joint exp agent");
    }
    const std::uint64_t n = space.num_joint_states();
    if (n > cap) {
        throw CapacityError("joint state count " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
    }
    if (base.belief().size() != n) {
        throw ContractError("solve_niche_market: base belief does not match the space");
    }

    std::vector<double> log_price(n, 0.0);
    for (std::uint64_t k = 0; k < n; ++k) {
        const double p = base.belief().probability(k);
        if (p <= 0.0) throw DomainError("solve_niche_market: base belief has a zero entry");
        log_price[k] = std::log(p);
    }
    for (const auto& a : niche_agents) {
        if (a.style() != AgentStyle::Niche) {
            throw ContractError("solve_niche_market: agent '" + a.id() + "' is not a niche agent");
        }
        const auto map = joint_to_clique_index(a.factor().scope(), space, cap);
        for (std::uint64_t k = 0; k < n; ++k) log_price[k] += a.factor().log_value(map[k]);
    }
    const double log_z = log_sum_exp(log_price);

    EquilibriumReport report;
    report.prices.assign(n, 0.0);
    for (std::uint64_t k = 0; k < n; ++k) report.prices[k] = std::exp(log_price[k] - log_z);
    report.positions.push_back(buy_exp(base, report.prices));
    for (const auto& a : niche_agents) {
        report.positions.push_back(buy_niche(a, report.prices, space));
    }
    report.clearing_residual = max_norm(sum_positions(report.positions, n));
    report.iterations = 1;
    report.converged = report.clearing_residual <= 1e-10;
    return report;
}

EquilibriumReport solve_linear_binary(const std::vector<Agent>& agents) {
    require_homogeneous(agents, UtilityKind::LinearDebtFree, "solve_linear_binary");
    if (agents.front().belief().size() != 2) {
        throw ContractError("solve_linear_binary needs exactly two complementary goods");
    }

    // Lower wealth-weighted median of the agents' P_i(1) values.
    std::vector<std::pair<double, double>> by_belief; // (P_i(1), wealth)
    double total_wealth = 0.0;
    for (const auto& a : agents) {
        by_belief.emplace_back(a.belief().probability(1), a.wealth());
        total_wealth += a.wealth();
    }
    std::sort(by_belief.begin(), by_belief.end());
    double median = by_belief.back().first;
    double cumulative = 0.0;
    bool knife_edge = false;
    for (const auto& [belief, wealth] : by_belief) {
        cumulative += wealth;
        if (cumulative >= total_wealth / 2.0) {
            median = belief;
            knife_edge = cumulative == total_wealth / 2.0;
            break;
        }
    }

    EquilibriumReport report;
    report.prices = {1.0 - median, median};
    report.iterations = 1;
    if (knife_edge) {
        report.warnings.push_back(
            "clearing price is an interval (wealth splits evenly at the median); "
            "lower median reported");
    }
    if (!(median > 0.0 && median < 1.0)) {
        report.warnings.push_back("median belief lies on the simplex boundary; prices degenerate");
        report.clearing_residual = std::numeric_limits<double>::infinity();
        return report;
    }

    // Clearing here means staked wealth balances across the two sides, with
    // agents indifferent at the median free to take either side.
    double above = 0.0, below = 0.0, at = 0.0;
    for (const auto& [belief, wealth] : by_belief) {
        if (belief > median) above += wealth;
        else if (belief < median) below += wealth;
        else at += wealth;
    }
    report.clearing_residual = std::max(0.0, std::abs(above - below) - at) / total_wealth;
    for (const auto& a : agents) report.positions.push_back(buy_linear(a, report.prices));
    report.converged = report.clearing_residual <= 1e-12;
    return report;
}

EquilibriumReport tatonnement(const std::vector<Agent>& agents, const OutcomeSpace& space,
                              PriceVector init, const TatonnementParams& params) {
    if (agents.empty()) throw ContractError("tatonnement needs at least one agent");
    if (!(params.step_size > 0.0) || !(params.tolerance > 0.0) || params.tolerance >= 1.0 ||
        !(params.damping > 0.0)) {
        throw ContractError("tatonnement parameters must be positive with tolerance < 1");
    }
    for (double c : init) {
        if (!(c > 0.0)) throw DomainError("tatonnement needs a strictly positive initial price");
    }
    PriceVector prices = normalize(init);

    const bool has_linear = std::any_of(agents.begin(), agents.end(), [](const Agent& a) {
        return a.utility() == UtilityKind::LinearDebtFree;
    });

    EquilibriumReport report;
    if (has_linear) {
        report.warnings.push_back(
            "linear agents present: demand is discontinuous and the equilibrium may be "
            "non-unique; residual measured modulo the risk-free direction");
    }

    auto residual_at = [&](const PriceVector& c) {
        std::vector<double> z = clearing_residual(agents, c, space);
        if (has_linear) z = neutral_adjusted_residual(z, c);
        return z;
    };

    std::vector<double> residual = residual_at(prices);
    double norm2 = two_norm(residual);
    double step = params.step_size;
    const double step_cap = 1000.0 * params.step_size;
    constexpr double kStepFloor = 1e-14;
    constexpr double kLogTrustRadius = 1.0; // per-good cap on |log price move|
    constexpr std::uint64_t kPatience = 5000;

    PriceVector best_prices = prices;
    double best_norm = max_norm(residual);
    std::uint64_t best_iteration = 0;
    std::uint64_t iteration = 0;

    while (max_norm(residual) > params.tolerance && iteration < params.max_iterations) {
        ++iteration;
        PriceVector candidate(prices.size());
        for (std::size_t k = 0; k < prices.size(); ++k) {
            const double move = std::clamp(step * residual[k], -kLogTrustRadius, kLogTrustRadius);
            candidate[k] = prices[k] * std::exp(move);
        }
        candidate = normalize(candidate);

        const std::vector<double> candidate_residual = residual_at(candidate);
        const double candidate_norm2 = two_norm(candidate_residual);
        if (candidate_norm2 <= norm2) {
            prices = std::move(candidate);
            residual = candidate_residual;
            norm2 = candidate_norm2;
            step = std::min(step * 1.05, step_cap);
            const double norm_inf = max_norm(residual);
            if (norm_inf < best_norm) {
                best_norm = norm_inf;
                best_prices = prices;
                best_iteration = iteration;
            }
        } else {
            step = std::max(step * params.damping, kStepFloor);
        }
        if (iteration - best_iteration > kPatience) {
            report.warnings.push_back("no residual improvement over " + std::to_string(kPatience) +
                                      " iterations; stopping early");
            break;
        }
    }

    report.prices = best_prices;
    report.clearing_residual = best_norm;
    report.iterations = iteration;
    report.converged = best_norm <= params.tolerance;
    if (!report.converged) {
        report.warnings.push_back("stopped at residual " + std::to_string(best_norm) + " after " +
                                  std::to_string(iteration) + " iterations without converging");
    }
    for (const auto& a : agents) report.positions.push_back(buy(a, report.prices, space));
    return report;
}

} // namespace beliefmarket
