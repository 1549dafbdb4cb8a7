#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "beliefmarket/agents.hpp"
#include "beliefmarket/beliefs.hpp"
#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

// A_ik(0), A_ik(1): an agent's summary of its belief and positions in every
// good except k.
using MessagePair = std::array<double, 2>;

// One binary bet per variable, paying on y_j = 1; the y_j = 0 side is a short
// position plus the risk-free unit. Exponential utility only.
class RestrictedMarket {
public:
    RestrictedMarket(OutcomeSpace space, std::vector<Agent> agents);

    const OutcomeSpace& space() const { return space_; }
    const std::vector<Agent>& agents() const { return agents_; }
    int num_goods() const { return space_.num_variables(); }

    // True iff agent i trades the bet on variable k (full-joint agents trade
    // everything; clique agents only their clique).
    bool participates(int agent, int good) const;

    // Agents trading good k, ascending.
    const std::vector<int>& participants(int good) const { return participants_[good]; }

    // P_ik(y_k): agent i's marginal on variable k (requires participation).
    MessagePair marginal(int agent, int good) const;

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    OutcomeSpace space_;
    std::vector<Agent> agents_;
    std::vector<std::vector<int>> participants_;  // by good
    std::vector<std::vector<MessagePair>> marginals_; // [agent][good]
    std::vector<std::string> warnings_;
};

// Full A_ik table, [agent][good].
struct MessageTable {
    std::vector<std::vector<MessagePair>> values;
};

struct Schedule {
    std::vector<int> order;    // empty = ascending; must cover every good
    double tolerance = 1e-9;   // max per-good price change per sweep
    std::uint64_t max_sweeps = 10000;
    bool jacobi = false;       // synchronous updates against a frozen snapshot
    double damping = 1.0;      // price <- (1-g)*old + g*new; 1 = off
};

struct SweepRecord {
    std::uint64_t sweep = 0;
    int good = 0;
    double old_price = 0.0;
    double new_price = 0.0;
    std::vector<double> holdings; // s_ik per agent (0 for non-participants)
};

struct MessagePassingReport {
    std::vector<double> prices;                 // per variable
    std::vector<std::vector<double>> positions; // [agent][good]
    MessageTable messages;                      // final A_ik
    std::vector<double> clearing;               // final per-good sum of s_ik
    std::vector<SweepRecord> trace;
    std::uint64_t sweeps = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

// A_ik(y_k) = sum over the agent's other variables of
// P_i(y^{-k} | y_k) * exp(sum_j s_j (c_j - y_j)); for clique-scoped agents the
// sum runs over clique states only.
MessagePair compute_message(const Agent& agent, int good, std::span<const double> positions,
                            std::span<const double> prices, const OutcomeSpace& space);

// s_ik = log((1-c_k)/c_k) + log(A(1) P(1) / (A(0) P(0))).
double local_buying(double price, const MessagePair& message, const MessagePair& marginal);

// c_k = G(1)/(G(0)+G(1)) with G(y) = prod_i (A_i(y) P_i(y))^(1/N); zeroes the
// sum of local_buying holdings exactly.
double update_price(std::span<const MessagePair> messages, std::span<const MessagePair> marginals);

// Gauss-Seidel sweeps (or Jacobi when scheduled): per good, recompute
// messages, clear the price, rebuy. Prices start at 0.5, positions at 0.
MessagePassingReport run_message_passing(const RestrictedMarket& market,
                                         const Schedule& schedule = {});

} // namespace beliefmarket
