#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beliefmarket/agents.hpp"
#include "beliefmarket/equilibrium.hpp"
#include "beliefmarket/message_passing.hpp"
#include "beliefmarket/outcome_space.hpp"

namespace beliefmarket {

enum class MarketKind { Joint, Restricted };
enum class SolverKind { Auto, ClosedForm, Tatonnement, MessagePassing };

std::string to_string(MarketKind kind);
std::string to_string(SolverKind kind);

struct SolverParams {
    SolverKind kind = SolverKind::Auto;
    TatonnementParams tatonnement;
    Schedule schedule;
    std::optional<PriceVector> init; // tatonnement start; uniform when absent
};

struct Scenario {
    OutcomeSpace space;
    MarketKind market;
    std::vector<Agent> agents;
    SolverParams solver;
    std::vector<std::string> warnings; // collected while loading (normalization etc.)
    std::string canonical;             // minified document; digests and round trips
    std::uint64_t joint_cap = kDefaultJointStateCap;
};

// Parse and validate the JSON scenario document. Throws ParseError for
// malformed input and ValidationError for violated invariants.
Scenario parse_scenario(const std::string& text);

// parse_scenario over the file's contents; missing file -> ParseError.
Scenario load_scenario(const std::string& path);

// FNV-1a 64-bit over the canonical document, rendered "fnv1a64:<16 hex>".
std::string scenario_digest(const Scenario& scenario);
std::uint64_t fnv1a64(std::string_view bytes);

// Labels of the scenario's tradable goods, in price-vector order.
std::vector<std::string> good_labels(const Scenario& scenario);

} // namespace beliefmarket
