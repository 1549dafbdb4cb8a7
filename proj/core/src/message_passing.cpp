#include "beliefmarket/message_passing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {

// The agent's belief as a table with an explicit scope: the whole space for
// full-joint agents, the clique for marginal agents, and the normalized
// factor for niche agents (the factorial-deviation semantics has no
// price-independent local belief, so the factor itself acts as one).
Belief local_belief(const Agent& agent, const OutcomeSpace& space) {
    switch (agent.style()) {
        case AgentStyle::FullJoint:
        case AgentStyle::Marginal:
            return agent.belief();
        case AgentStyle::Niche:
            return Belief::over(agent.factor().scope(), space, agent.factor().values());
    }
    throw ContractError("unknown agent style");
}

} // namespace

RestrictedMarket::RestrictedMarket(OutcomeSpace space, std::vector<Agent> agents)
    : space_(std::move(space)), agents_(std::move(agents)) {
    if (!space_.all_binary()) {
        throw ContractError("restricted market requires every variable binary");
    }
    if (agents_.empty()) throw ContractError("restricted market needs at least one agent");

    const int goods = space_.num_variables();
    participants_.assign(static_cast<std::size_t>(goods), {});
    marginals_.assign(agents_.size(), std::vector<MessagePair>(static_cast<std::size_t>(goods),
                                                               MessagePair{0.0, 0.0}));

    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const Agent& a = agents_[i];
        if (a.utility() != UtilityKind::ExponentialNegative) {
            throw ContractError("restricted market: agent '" + a.id() +
                                "' must have exponential utility");
        }
        if (a.style() == AgentStyle::Niche) {
            warnings_.push_back("niche agent '" + a.id() +
                                "' participates through its normalized factor as a local belief");
        }
        const Belief local = local_belief(a, space_);
        if (a.style() == AgentStyle::FullJoint) {
            if (local.size() != space_.num_joint_states()) {
                throw ContractError("agent '" + a.id() + "' belief does not match the space");
            }
            for (int k = 0; k < goods; ++k) participants_[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
            const auto map_cache = enumerate_joint(space_, space_.num_joint_states());
            for (int k = 0; k < goods; ++k) {
                MessagePair m{0.0, 0.0};
                for (std::uint64_t s = 0; s < local.size(); ++s) {
                    m[static_cast<std::size_t>(map_cache[s][static_cast<std::size_t>(k)])] +=
                        local.probability(s);
                }
                marginals_[i][static_cast<std::size_t>(k)] = m;
            }
        } else {
            const Clique& clique = local.scope();
            clique.check_within(space_);
            const auto substates = enumerate_clique(clique, space_);
            for (int d = 0; d < clique.size(); ++d) {
                const int k = clique.members()[static_cast<std::size_t>(d)];
                participants_[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
                MessagePair m{0.0, 0.0};
                for (std::uint64_t s = 0; s < local.size(); ++s) {
                    m[static_cast<std::size_t>(substates[s][static_cast<std::size_t>(d)])] +=
                        local.probability(s);
                }
                marginals_[i][static_cast<std::size_t>(k)] = m;
            }
        }
    }
    for (int k = 0; k < goods; ++k) {
        if (participants_[static_cast<std::size_t>(k)].empty()) {
            warnings_.push_back("good '" + space_.variable(k).name +
                                "=1' has no participants; its price stays at initialization");
        }
    }
}

bool RestrictedMarket::participates(int agent, int good) const {
    const auto& p = participants_.at(static_cast<std::size_t>(good));
    return std::binary_search(p.begin(), p.end(), agent);
}

MessagePair RestrictedMarket::marginal(int agent, int good) const {
    if (!participates(agent, good)) {
        throw ContractError("agent " + std::to_string(agent) + " does not trade good " +
                            std::to_string(good));
    }
    return marginals_.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(good));
}

MessagePair compute_message(const Agent& agent, int good, std::span<const double> positions,
                            std::span<const double> prices, const OutcomeSpace& space) {
    if (!space.all_binary()) throw ContractError("messages require binary variables");
    const int goods = space.num_variables();
    if (good < 0 || good >= goods) throw ContractError("good index out of range");
    if (positions.size() != static_cast<std::size_t>(goods) || prices.size() != positions.size()) {
        throw ContractError("positions/prices must have one entry per variable");
    }
    if (agent.utility() != UtilityKind::ExponentialNegative) {
        throw ContractError("messages are defined for exponential-utility agents");
    }

    const Belief local = local_belief(agent, space);
    // numerator[y] = sum P(state) * exp(sum_{j != good} s_j (c_j - y_j));
    // denominator[y] = the same sum with weight 1, i.e. the marginal P(y_good = y).
    // A = numerator / denominator, so A == 1 exactly at all-zero positions.
    MessagePair numerator{0.0, 0.0};
    MessagePair denominator{0.0, 0.0};

    if (local.scoped()) {
        const Clique& clique = local.scope();
        clique.check_within(space);
        if (!clique.contains(good)) {
            throw ContractError("agent '" + agent.id() + "' does not trade good " +
                                std::to_string(good));
        }
        const auto substates = enumerate_clique(clique, space);
        for (std::uint64_t s = 0; s < local.size(); ++s) {
            const double p = local.probability(s);
            double exponent = 0.0;
            int y_good = 0;
            for (int d = 0; d < clique.size(); ++d) {
                const int j = clique.members()[static_cast<std::size_t>(d)];
                const int y = substates[s][static_cast<std::size_t>(d)];
                if (j == good) {
                    y_good = y;
                } else {
                    exponent += positions[static_cast<std::size_t>(j)] *
                                (prices[static_cast<std::size_t>(j)] - static_cast<double>(y));
                }
            }
            numerator[static_cast<std::size_t>(y_good)] += p * std::exp(exponent);
            denominator[static_cast<std::size_t>(y_good)] += p;
        }
    } else {
        if (local.size() != space.num_joint_states()) {
            throw ContractError("agent belief does not match the space");
        }
        JointState state(static_cast<std::size_t>(goods), 0);
        for (std::uint64_t s = 0; s < local.size(); ++s) {
            const double p = local.probability(s);
            double exponent = 0.0;
            for (int j = 0; j < goods; ++j) {
                if (j == good) continue;
                exponent += positions[static_cast<std::size_t>(j)] *
                            (prices[static_cast<std::size_t>(j)] -
                             static_cast<double>(state[static_cast<std::size_t>(j)]));
            }
            const auto y_good = static_cast<std::size_t>(state[static_cast<std::size_t>(good)]);
            numerator[y_good] += p * std::exp(exponent);
            denominator[y_good] += p;
            for (int j = goods - 1; j >= 0; --j) { // last variable fastest
                if (++state[static_cast<std::size_t>(j)] < 2) break;
                state[static_cast<std::size_t>(j)] = 0;
            }
        }
    }

    for (int y = 0; y < 2; ++y) {
        if (!(denominator[static_cast<std::size_t>(y)] > 0.0)) {
            throw DomainError("degenerate conditional: agent '" + agent.id() +
                              "' assigns zero probability to " + space.variable(good).name + "=" +
                              std::to_string(y));
        }
    }
    return MessagePair{numerator[0] / denominator[0], numerator[1] / denominator[1]};
}

double local_buying(double price, const MessagePair& message, const MessagePair& marginal) {
    if (!(price > 0.0 && price < 1.0)) {
        throw DomainError("local buying needs a price inside (0,1)");
    }
    for (int y = 0; y < 2; ++y) {
        const auto i = static_cast<std::size_t>(y);
        if (!(message[i] > 0.0) || !(marginal[i] > 0.0) || !std::isfinite(message[i]) ||
            !std::isfinite(marginal[i])) {
            throw DomainError("local buying needs positive finite messages and marginals");
        }
    }
    return std::log((1.0 - price) / price) +
           std::log((message[1] * marginal[1]) / (message[0] * marginal[0]));
}

double update_price(std::span<const MessagePair> messages, std::span<const MessagePair> marginals) {
    if (messages.empty() || messages.size() != marginals.size()) {
        throw ContractError("update_price needs matching nonempty message/marginal lists");
    }
    const double inv_n = 1.0 / static_cast<double>(messages.size());
    double log_g0 = 0.0, log_g1 = 0.0;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        for (int y = 0; y < 2; ++y) {
            const auto j = static_cast<std::size_t>(y);
            if (!(messages[i][j] > 0.0) || !(marginals[i][j] > 0.0)) {
                throw DomainError("update_price needs positive messages and marginals");
            }
        }
        log_g0 += inv_n * std::log(messages[i][0] * marginals[i][0]);
        log_g1 += inv_n * std::log(messages[i][1] * marginals[i][1]);
    }
    return 1.0 / (1.0 + std::exp(log_g0 - log_g1));
}

MessagePassingReport run_message_passing(const RestrictedMarket& market,
                                         const Schedule& schedule) {
    const int goods = market.num_goods();
    const std::size_t n_agents = market.agents().size();

    std::vector<int> order = schedule.order;
    if (order.empty()) {
        order.resize(static_cast<std::size_t>(goods));
        std::iota(order.begin(), order.end(), 0);
    } else {
        std::vector<bool> seen(static_cast<std::size_t>(goods), false);
        for (int k : order) {
            if (k < 0 || k >= goods) throw ContractError("schedule references an unknown good");
            seen[static_cast<std::size_t>(k)] = true;
        }
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
            throw ContractError("schedule must cover every good at least once per sweep");
        }
    }
    if (!(schedule.tolerance > 0.0) || schedule.max_sweeps == 0 ||
        !(schedule.damping > 0.0 && schedule.damping <= 1.0)) {
        throw ContractError("schedule needs tolerance > 0, max_sweeps >= 1, damping in (0,1]");
    }

    MessagePassingReport report;
    report.warnings = market.warnings();
    report.prices.assign(static_cast<std::size_t>(goods), 0.5);
    report.positions.assign(n_agents, std::vector<double>(static_cast<std::size_t>(goods), 0.0));
    report.messages.values.assign(n_agents,
                                  std::vector<MessagePair>(static_cast<std::size_t>(goods),
                                                           MessagePair{1.0, 1.0}));

    auto& prices = report.prices;
    auto& positions = report.positions;

    for (std::uint64_t sweep = 1; sweep <= schedule.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        const std::vector<double> snapshot = prices; // read frozen in Jacobi mode
        std::vector<std::pair<int, double>> pending;
        std::vector<std::pair<std::pair<std::size_t, int>, double>> pending_holdings;

        for (int k : order) {
            const auto ku = static_cast<std::size_t>(k);
            const auto& parts = market.participants(k);
            const std::vector<double>& read_prices = schedule.jacobi ? snapshot : prices;
            const double old_price = schedule.jacobi ? snapshot[ku] : prices[ku];

            SweepRecord record;
            record.sweep = sweep;
            record.good = k;
            record.old_price = old_price;
            record.holdings.assign(n_agents, 0.0);

            if (parts.empty()) {
                record.new_price = old_price;
                report.trace.push_back(std::move(record));
                continue;
            }

            std::vector<MessagePair> messages, marginals;
            messages.reserve(parts.size());
            marginals.reserve(parts.size());
            for (int i : parts) {
                const auto iu = static_cast<std::size_t>(i);
                messages.push_back(compute_message(market.agents()[iu], k, positions[iu],
                                                   read_prices, market.space()));
                marginals.push_back(market.marginal(i, k));
                report.messages.values[iu][ku] = messages.back();
            }
            const double cleared = update_price(messages, marginals);
            const double new_price =
                (1.0 - schedule.damping) * old_price + schedule.damping * cleared;
            max_delta = std::max(max_delta, std::abs(new_price - old_price));

            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                const auto iu = static_cast<std::size_t>(parts[pi]);
                const double holding = local_buying(new_price, messages[pi], marginals[pi]);
                record.holdings[iu] = holding;
                if (schedule.jacobi) {
                    pending_holdings.push_back({{iu, k}, holding});
                } else {
                    positions[iu][ku] = holding;
                }
            }
            record.new_price = new_price;
            report.trace.push_back(std::move(record));
            if (schedule.jacobi) {
                pending.emplace_back(k, new_price);
            } else {
                prices[ku] = new_price;
            }
        }

        if (schedule.jacobi) {
            for (const auto& [k, c] : pending) prices[static_cast<std::size_t>(k)] = c;
            for (const auto& [key, h] : pending_holdings) {
                positions[key.first][static_cast<std::size_t>(key.second)] = h;
            }
        }

        report.sweeps = sweep;
        if (max_delta <= schedule.tolerance) {
            report.converged = true;
            break;
        }
    }

    report.clearing.assign(static_cast<std::size_t>(goods), 0.0);
    for (std::size_t i = 0; i < n_agents; ++i) {
        for (int k = 0; k < goods; ++k) {
            report.clearing[static_cast<std::size_t>(k)] += positions[i][static_cast<std::size_t>(k)];
        }
    }
    if (!report.converged) {
        report.warnings.push_back("message passing did not converge within " +
                                  std::to_string(schedule.max_sweeps) + " sweeps");
    }
    return report;
}

} // namespace beliefmarket
