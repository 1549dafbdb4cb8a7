#include "beliefmarket/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "beliefmarket/errors.hpp"

namespace beliefmarket {

namespace {

using nlohmann::json;

constexpr const char* kStateOrder = "row_major_last_fastest";

[[noreturn]] void fail_validation(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

const json& require(const json& node, const char* key, const std::string& where) {
    auto it = node.find(key);
    if (it == node.end()) fail_validation(where, std::string("missing field '") + key + "'");
    return *it;
}

double require_number(const json& node, const char* key, const std::string& where) {
    const json& v = require(node, key, where);
    if (!v.is_number()) fail_validation(where, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::string require_string(const json& node, const char* key, const std::string& where) {
    const json& v = require(node, key, where);
    if (!v.is_string()) fail_validation(where, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> read_table(const json& table_node, const std::string& where,
                               std::vector<std::string>& warnings, bool is_belief) {
    if (!table_node.is_object()) {
        fail_validation(where, "table must be an object with 'order' and 'table'");
    }
    const std::string order = require_string(table_node, "order", where);
    if (order != kStateOrder) {
        fail_validation(where, "state order must be declared '" + std::string(kStateOrder) +
                                   "', got '" + order + "'");
    }
    const json& entries = require(table_node, "table", where);
    if (!entries.is_array() || entries.empty()) {
        fail_validation(where, "'table' must be a nonempty array of numbers");
    }
    std::vector<double> values;
    values.reserve(entries.size());
    for (const auto& e : entries) {
        if (!e.is_number()) fail_validation(where, "'table' must contain only numbers");
        values.push_back(e.get<double>());
    }
    const bool log_domain = table_node.value("log", false);
    if (log_domain) {
        // Stable exponentiation; normalization happens downstream.
        double m = values.front();
        for (double v : values) m = std::max(m, v);
        if (!std::isfinite(m)) fail_validation(where, "log table has no finite entry");
        double lse = 0.0;
        for (double v : values) lse += std::exp(v - m);
        const double log_sum = m + std::log(lse);
        if (is_belief && std::abs(log_sum) > 1e-6) {
            std::ostringstream os;
            os << where << ": log table sums to exp(" << log_sum << "); normalized";
            warnings.push_back(os.str());
        }
        for (double& v : values) v = std::exp(v - m);
    } else if (is_belief) {
        double sum = 0.0;
        for (double v : values) sum += v;
        if (std::abs(sum - 1.0) > 1e-6) {
            std::ostringstream os;
            os << where << ": table sums to " << sum << "; normalized";
            warnings.push_back(os.str());
        }
    }
    return values;
}

Clique read_clique(const json& agent_node, const OutcomeSpace& space, const std::string& where) {
    const json& names = require(agent_node, "clique", where);
    if (!names.is_array() || names.empty()) {
        fail_validation(where, "'clique' must be a nonempty array of variable names");
    }
    std::vector<int> members;
    for (const auto& n : names) {
        if (!n.is_string()) fail_validation(where, "'clique' entries must be variable names");
        const int j = space.find_variable(n.get<std::string>());
        if (j < 0) {
            fail_validation(where, "clique references undeclared variable '" +
                                       n.get<std::string>() + "'");
        }
        members.push_back(j);
    }
    return Clique(std::move(members));
}

SolverKind solver_kind_from_string(const std::string& name, const std::string& where) {
    if (name == "auto") return SolverKind::Auto;
    if (name == "closed_form") return SolverKind::ClosedForm;
    if (name == "tatonnement") return SolverKind::Tatonnement;
    if (name == "message_passing") return SolverKind::MessagePassing;
    fail_validation(where, "unknown solver kind '" + name +
                               "' (expected auto, closed_form, tatonnement, message_passing)");
}

} // namespace

std::string to_string(MarketKind kind) {
    return kind == MarketKind::Joint ? "joint" : "restricted";
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Auto: return "auto";
        case SolverKind::ClosedForm: return "closed_form";
        case SolverKind::Tatonnement: return "tatonnement";
        case SolverKind::MessagePassing: return "message_passing";
    }
    throw ContractError("unknown solver kind");
}

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");

    std::vector<std::string> warnings;

    // --- space ---
    const json& space_node = require(doc, "space", "scenario");
    const json& vars_node = require(space_node, "variables", "space");
    if (!vars_node.is_array() || vars_node.empty()) {
        fail_validation("space", "'variables' must be a nonempty array");
    }
    std::vector<Variable> variables;
    for (const auto& v : vars_node) {
        if (!v.is_object()) fail_validation("space", "each variable must be an object");
        Variable var;
        var.name = require_string(v, "name", "space.variables");
        var.cardinality = static_cast<int>(v.value("cardinality", 2));
        variables.push_back(std::move(var));
    }
    OutcomeSpace space(std::move(variables)); // ContractError here surfaces as-is

    // --- market ---
    MarketKind market = MarketKind::Joint;
    if (auto it = doc.find("market"); it != doc.end()) {
        std::string kind;
        if (it->is_string()) kind = it->get<std::string>();
        else if (it->is_object()) kind = require_string(*it, "kind", "market");
        else fail_validation("market", "must be a string or an object with 'kind'");
        if (kind == "joint") market = MarketKind::Joint;
        else if (kind == "restricted") market = MarketKind::Restricted;
        else fail_validation("market", "unknown kind '" + kind + "' (expected joint, restricted)");
    }

    std::uint64_t joint_cap = kDefaultJointStateCap;
    if (auto it = doc.find("joint_cap"); it != doc.end()) {
        if (!it->is_number_unsigned()) fail_validation("joint_cap", "must be a positive integer");
        joint_cap = it->get<std::uint64_t>();
    }
    if (market == MarketKind::Joint && space.num_joint_states() > joint_cap) {
        fail_validation("space", "joint market has " + std::to_string(space.num_joint_states()) +
                                     " goods, above the cap " + std::to_string(joint_cap) +
                                     "; use a restricted market for spaces this large");
    }

    // --- agents ---
    const json& agents_node = require(doc, "agents", "scenario");
    if (!agents_node.is_array() || agents_node.empty()) {
        fail_validation("agents", "must be a nonempty array");
    }
    std::vector<Agent> agents;
    std::vector<std::string> seen_ids;
    for (const auto& a : agents_node) {
        if (!a.is_object()) fail_validation("agents", "each agent must be an object");
        const std::string id = require_string(a, "id", "agents");
        const std::string where = "agent '" + id + "'";
        for (const auto& prev : seen_ids) {
            if (prev == id) fail_validation(where, "duplicate agent id");
        }
        seen_ids.push_back(id);

        const double wealth = a.contains("wealth") ? require_number(a, "wealth", where) : 1.0;
        const std::string style = a.value("style", "full_joint");

        try {
            // Niche and marginal agents are exponential by construction, so
            // the utility tag is optional for them and merely checked when
            // present.
            const UtilityKind utility =
                (a.contains("utility") || style == "full_joint")
                    ? utility_kind_from_string(require_string(a, "utility", where))
                    : UtilityKind::ExponentialNegative;
            if (style == "full_joint") {
                auto table = read_table(require(a, "belief", where), where + " belief", warnings,
                                        /*is_belief=*/true);
                if (table.size() != space.num_joint_states()) {
                    fail_validation(where, "belief table has " + std::to_string(table.size()) +
                                               " entries; the space has " +
                                               std::to_string(space.num_joint_states()) +
                                               " joint states");
                }
                agents.push_back(
                    Agent::full_joint(id, wealth, utility, Belief::full(space, std::move(table))));
            } else if (style == "niche") {
                if (utility != UtilityKind::ExponentialNegative) {
                    fail_validation(where, "niche agents require exponential utility");
                }
                Clique clique = read_clique(a, space, where);
                auto table = read_table(require(a, "factor", where), where + " factor", warnings,
                                        /*is_belief=*/false);
                agents.push_back(
                    Agent::niche(id, wealth, FactorTable(std::move(clique), space, std::move(table))));
            } else if (style == "marginal") {
                if (utility != UtilityKind::ExponentialNegative) {
                    fail_validation(where, "marginal agents require exponential utility");
                }
                Clique clique = read_clique(a, space, where);
                auto table = read_table(require(a, "belief", where), where + " belief", warnings,
                                        /*is_belief=*/true);
                agents.push_back(Agent::marginal(
                    id, wealth, Belief::over(std::move(clique), space, std::move(table))));
            } else {
                fail_validation(where, "unknown style '" + style +
                                           "' (expected full_joint, niche, marginal)");
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const MarketError& e) {
            // Table/clique construction errors become validation diagnostics.
            fail_validation(where, e.what());
        }
    }

    // --- solver ---
    SolverParams solver;
    if (auto it = doc.find("solver"); it != doc.end()) {
        const json* params = nullptr;
        if (it->is_string()) {
            solver.kind = solver_kind_from_string(it->get<std::string>(), "solver");
        } else if (it->is_object()) {
            solver.kind = solver_kind_from_string(
                it->contains("kind") ? require_string(*it, "kind", "solver") : "auto", "solver");
            if (auto p = it->find("params"); p != it->end()) {
                if (!p->is_object()) fail_validation("solver", "'params' must be an object");
                params = &*p;
            }
        } else {
            fail_validation("solver", "must be a string or an object");
        }
        if (params) {
            const json& p = *params;
            solver.tatonnement.step_size = p.value("step_size", solver.tatonnement.step_size);
            solver.tatonnement.tolerance = p.value("tolerance", solver.tatonnement.tolerance);
            solver.tatonnement.max_iterations =
                p.value("max_iterations", solver.tatonnement.max_iterations);
            solver.tatonnement.damping = p.value("damping", solver.tatonnement.damping);
            solver.schedule.tolerance = p.value("tolerance", solver.schedule.tolerance);
            solver.schedule.max_sweeps = p.value("max_sweeps", solver.schedule.max_sweeps);
            solver.schedule.jacobi = p.value("jacobi", solver.schedule.jacobi);
            solver.schedule.damping = p.value("gamma", solver.schedule.damping);
            if (auto init = p.find("init"); init != p.end()) {
                if (!init->is_array()) fail_validation("solver", "'init' must be an array");
                PriceVector v;
                for (const auto& x : *init) {
                    if (!x.is_number()) fail_validation("solver", "'init' must contain numbers");
                    v.push_back(x.get<double>());
                }
                solver.init = std::move(v);
            }
        }
    }

    // --- cross-cutting invariants ---
    if (market == MarketKind::Restricted) {
        if (!space.all_binary()) {
            fail_validation("market", "restricted markets require every variable binary");
        }
        for (const auto& a : agents) {
            if (a.utility() != UtilityKind::ExponentialNegative) {
                fail_validation("market", "restricted markets require exponential utility; agent '" +
                                              a.id() + "' is " + to_string(a.utility()));
            }
        }
        if (solver.kind == SolverKind::Tatonnement || solver.kind == SolverKind::ClosedForm) {
            fail_validation("solver", to_string(solver.kind) +
                                          " operates on joint markets; use message_passing");
        }
    } else {
        if (solver.kind == SolverKind::MessagePassing) {
            fail_validation("solver", "message_passing requires a restricted market");
        }
    }
    if (solver.init && solver.init->size() != space.num_joint_states()) {
        fail_validation("solver", "'init' length must equal the joint state count");
    }

    Scenario scenario{std::move(space), market,      std::move(agents), std::move(solver),
                      std::move(warnings), doc.dump(), joint_cap};
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string scenario_digest(const Scenario& scenario) {
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(scenario.canonical);
    return os.str();
}

std::vector<std::string> good_labels(const Scenario& scenario) {
    std::vector<std::string> labels;
    if (scenario.market == MarketKind::Restricted) {
        for (const auto& g : single_var_goods(scenario.space)) {
            labels.push_back(g.label(scenario.space));
        }
    } else {
        for (const auto& g : joint_goods(scenario.space, scenario.joint_cap)) {
            labels.push_back(g.label(scenario.space));
        }
    }
    return labels;
}

} // namespace beliefmarket
