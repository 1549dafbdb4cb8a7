#include "beliefmarket/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "beliefmarket/errors.hpp"
#include "beliefmarket/oracle.hpp"

namespace beliefmarket {

namespace {

using nlohmann::json;

struct Population {
    std::size_t full_joint = 0, niche = 0, marginal = 0;
    bool all_log = true, all_exp = true, all_linear = true;
    const Agent* lone_full_joint = nullptr;
};

Population classify(const std::vector<Agent>& agents) {
    Population p;
    for (const auto& a : agents) {
        switch (a.style()) {
            case AgentStyle::FullJoint:
                ++p.full_joint;
                p.lone_full_joint = &a;
                break;
            case AgentStyle::Niche: ++p.niche; break;
            case AgentStyle::Marginal: ++p.marginal; break;
        }
        p.all_log &= a.utility() == UtilityKind::Logarithmic;
        p.all_exp &= a.utility() == UtilityKind::ExponentialNegative;
        p.all_linear &= a.utility() == UtilityKind::LinearDebtFree;
    }
    if (p.full_joint != 1) p.lone_full_joint = nullptr;
    return p;
}

bool is_linear_binary(const Scenario& s, const Population& p) {
    return p.all_linear && p.full_joint == s.agents.size() && s.space.num_variables() == 1 &&
           s.space.num_joint_states() == 2;
}

struct JointSolve {
    std::string name;
    EquilibriumReport eq;
};

JointSolve solve_joint(const Scenario& scenario) {
    const Population pop = classify(scenario.agents);
    const SolverKind kind = scenario.solver.kind;

    if (kind == SolverKind::Auto || kind == SolverKind::ClosedForm) {
        if (pop.all_log && pop.full_joint == scenario.agents.size()) {
            return {"closed_form_log", solve_log_market(scenario.agents)};
        }
        if (pop.all_exp && pop.full_joint == scenario.agents.size()) {
            return {"closed_form_exp", solve_exp_market(scenario.agents)};
        }
        if (pop.all_exp && pop.lone_full_joint && pop.niche + 1 == scenario.agents.size() &&
            pop.niche >= 1) {
            std::vector<Agent> niche_agents;
            for (const auto& a : scenario.agents) {
                if (a.style() == AgentStyle::Niche) niche_agents.push_back(a);
            }
            return {"closed_form_niche",
                    solve_niche_market(*pop.lone_full_joint, niche_agents, scenario.space,
                                       scenario.joint_cap)};
        }
        if (is_linear_binary(scenario, pop)) {
            return {"weighted_median", solve_linear_binary(scenario.agents)};
        }
        if (kind == SolverKind::ClosedForm) {
            throw ValidationError(
                "no closed form covers this agent population; use tatonnement or auto");
        }
    }

    PriceVector init;
    if (scenario.solver.init) {
        init = *scenario.solver.init;
    } else {
        init.assign(scenario.space.num_joint_states(),
                    1.0 / static_cast<double>(scenario.space.num_joint_states()));
    }
    return {"tatonnement",
            tatonnement(scenario.agents, scenario.space, std::move(init),
                        scenario.solver.tatonnement)};
}

double wall_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

RunReport run_scenario(const Scenario& scenario) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.digest = scenario_digest(scenario);
    report.good_labels = good_labels(scenario);
    report.warnings = scenario.warnings;
    for (const auto& a : scenario.agents) report.agent_ids.push_back(a.id());

    if (scenario.market == MarketKind::Restricted) {
        RestrictedMarket market(scenario.space, scenario.agents);
        MessagePassingReport mp = run_message_passing(market, scenario.solver.schedule);
        report.solver_used = "message_passing";
        report.prices = mp.prices;
        report.positions = mp.positions;
        double residual = 0.0;
        for (double c : mp.clearing) residual = std::max(residual, std::abs(c));
        report.residual = residual;
        report.iterations = mp.sweeps;
        report.converged = mp.converged;
        report.warnings.insert(report.warnings.end(), mp.warnings.begin(), mp.warnings.end());
    } else {
        JointSolve solved = solve_joint(scenario);
        report.solver_used = solved.name;
        report.prices = solved.eq.prices;
        for (const auto& pos : solved.eq.positions) report.positions.push_back(pos.holdings);
        report.residual = solved.eq.clearing_residual;
        report.iterations = solved.eq.iterations;
        report.converged = solved.eq.converged;
        report.warnings.insert(report.warnings.end(), solved.eq.warnings.begin(),
                               solved.eq.warnings.end());
    }
    report.wall_time_seconds = wall_seconds(start);
    return report;
}

RunReport validate_scenario(const Scenario& scenario, double closed_form_tolerance,
                            double grid_tolerance) {
    RunReport report = run_scenario(scenario);
    ValidationOutcome outcome;

    auto compare = [&](const std::vector<double>& oracle_prices, const std::string& oracle,
                       double tolerance) {
        outcome.oracle = oracle;
        outcome.tolerance = tolerance;
        double worst = 0.0;
        for (std::size_t k = 0; k < report.prices.size(); ++k) {
            worst = std::max(worst, std::abs(report.prices[k] - oracle_prices[k]));
        }
        outcome.discrepancy = worst;
        outcome.status = worst <= tolerance ? ValidationOutcome::Status::Passed
                                            : ValidationOutcome::Status::Failed;
    };

    try {
        const Population pop = classify(scenario.agents);
        if (scenario.market == MarketKind::Restricted) {
            if (scenario.agents.size() == 1 && pop.full_joint == 1) {
                const auto marginals =
                    exact_marginals(scenario.agents.front().belief(), scenario.space);
                std::vector<double> oracle_prices;
                for (const auto& m : marginals) oracle_prices.push_back(m.probability(1));
                compare(oracle_prices, "exact_marginals", closed_form_tolerance);
            } else {
                outcome.status = ValidationOutcome::Status::Unvalidatable;
                outcome.note = "no independent oracle for multi-agent restricted markets";
            }
        } else if (pop.all_exp && pop.lone_full_joint && pop.niche >= 1 &&
                   pop.niche + 1 == scenario.agents.size()) {
            std::vector<FactorTable> factors;
            for (const auto& a : scenario.agents) {
                if (a.style() == AgentStyle::Niche) factors.push_back(a.factor());
            }
            const Belief product = brute_force_joint_product(
                scenario.space, pop.lone_full_joint->belief(), factors, scenario.joint_cap);
            compare(product.probabilities(), "brute_force_joint_product", closed_form_tolerance);
        } else if (is_linear_binary(scenario, pop)) {
            // Direct cumulative-wealth scan, independent of the solver path.
            std::vector<std::pair<double, double>> sorted;
            double total = 0.0;
            for (const auto& a : scenario.agents) {
                sorted.emplace_back(a.belief().probability(1), a.wealth());
                total += a.wealth();
            }
            std::sort(sorted.begin(), sorted.end());
            double cumulative = 0.0, median = sorted.back().first;
            for (const auto& [b, w] : sorted) {
                cumulative += w;
                if (2.0 * cumulative >= total) {
                    median = b;
                    break;
                }
            }
            compare({1.0 - median, median}, "cumulative_wealth_median", closed_form_tolerance);
        } else if (scenario.space.num_joint_states() <= 3) {
            const auto oracle_prices =
                brute_force_equilibrium(scenario.agents, scenario.space, 1e-3);
            compare(oracle_prices, "brute_force_equilibrium", grid_tolerance);
        } else {
            outcome.status = ValidationOutcome::Status::Unvalidatable;
            outcome.note = "market has " + std::to_string(scenario.space.num_joint_states()) +
                           " goods; unvalidatable at this scale";
        }
    } catch (const CapacityError& e) {
        outcome.status = ValidationOutcome::Status::Unvalidatable;
        outcome.note = std::string(e.what()) + "; unvalidatable at this scale";
    }

    report.validation = outcome;
    return report;
}

MessagePassingReport trace_scenario(const Scenario& scenario) {
    if (scenario.market != MarketKind::Restricted) {
        throw ValidationError("trace requires a restricted (message-passing) market");
    }
    RestrictedMarket market(scenario.space, scenario.agents);
    return run_message_passing(market, scenario.solver.schedule);
}

std::string report_to_json(const RunReport& report, const Scenario& scenario) {
    json doc;
    doc["digest"] = report.digest;
    doc["solver"] = report.solver_used;
    doc["converged"] = report.converged;
    doc["residual"] = report.residual;
    doc["iterations"] = report.iterations;
    doc["wall_time_seconds"] = report.wall_time_seconds;
    doc["price_vector"] = report.prices;
    json prices = json::object();
    for (std::size_t k = 0; k < report.prices.size(); ++k) {
        prices[report.good_labels[k]] = report.prices[k];
    }
    doc["prices"] = prices;
    doc["good_labels"] = report.good_labels;
    json positions = json::object();
    for (std::size_t i = 0; i < report.agent_ids.size(); ++i) {
        positions[report.agent_ids[i]] = report.positions[i];
    }
    doc["positions"] = positions;
    doc["agent_ids"] = report.agent_ids;
    doc["warnings"] = report.warnings;
    if (report.validation) {
        json v;
        switch (report.validation->status) {
            case ValidationOutcome::Status::Passed: v["status"] = "passed"; break;
            case ValidationOutcome::Status::Failed: v["status"] = "failed"; break;
            case ValidationOutcome::Status::Unvalidatable: v["status"] = "unvalidatable"; break;
        }
        v["oracle"] = report.validation->oracle;
        v["discrepancy"] = report.validation->discrepancy;
        v["tolerance"] = report.validation->tolerance;
        v["note"] = report.validation->note;
        doc["validation"] = v;
    }
    doc["scenario"] = json::parse(scenario.canonical);
    return doc.dump(2);
}

RunReport report_from_json(const std::string& text, std::optional<Scenario>* scenario_out) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    RunReport report;
    try {
        report.digest = doc.at("digest").get<std::string>();
        report.solver_used = doc.at("solver").get<std::string>();
        report.converged = doc.at("converged").get<bool>();
        report.residual = doc.at("residual").get<double>();
        report.iterations = doc.at("iterations").get<std::uint64_t>();
        report.wall_time_seconds = doc.at("wall_time_seconds").get<double>();
        report.prices = doc.at("price_vector").get<std::vector<double>>();
        report.good_labels = doc.at("good_labels").get<std::vector<std::string>>();
        report.agent_ids = doc.at("agent_ids").get<std::vector<std::string>>();
        for (const auto& id : report.agent_ids) {
            report.positions.push_back(doc.at("positions").at(id).get<std::vector<double>>());
        }
        report.warnings = doc.at("warnings").get<std::vector<std::string>>();
        if (doc.contains("validation")) {
            ValidationOutcome v;
            const std::string status = doc["validation"].at("status").get<std::string>();
            v.status = status == "passed"     ? ValidationOutcome::Status::Passed
                       : status == "failed"   ? ValidationOutcome::Status::Failed
                                              : ValidationOutcome::Status::Unvalidatable;
            v.oracle = doc["validation"].value("oracle", "");
            v.discrepancy = doc["validation"].value("discrepancy", 0.0);
            v.tolerance = doc["validation"].value("tolerance", 0.0);
            v.note = doc["validation"].value("note", "");
            report.validation = v;
        }
        Scenario embedded = parse_scenario(doc.at("scenario").dump());
        if (scenario_digest(embedded) != report.digest) {
            throw ValidationError("report digest does not match its embedded scenario");
        }
        if (scenario_out) scenario_out->emplace(std::move(embedded));
    } catch (const json::exception& e) {
        throw ParseError(std::string("report is missing required fields: ") + e.what());
    }
    return report;
}

std::string render_report(const RunReport& report) {
    std::ostringstream os;
    os << "solver:     " << report.solver_used << "\n";
    os << "digest:     " << report.digest << "\n";
    os << "converged:  " << (report.converged ? "yes" : "no") << "   (residual "
       << format_double(report.residual) << ", " << report.iterations << " iterations)\n";
    os << "wall time:  " << std::fixed << std::setprecision(4) << report.wall_time_seconds
       << "s\n\n";
    os.unsetf(std::ios::floatfield);

    std::size_t label_width = 4;
    for (const auto& l : report.good_labels) label_width = std::max(label_width, l.size());
    os << std::left << std::setw(static_cast<int>(label_width) + 2) << "good" << "price\n";
    for (std::size_t k = 0; k < report.prices.size(); ++k) {
        os << std::left << std::setw(static_cast<int>(label_width) + 2) << report.good_labels[k]
           << format_double(report.prices[k]) << "\n";
    }

    if (!report.agent_ids.empty()) {
        std::size_t id_width = 5;
        for (const auto& id : report.agent_ids) id_width = std::max(id_width, id.size());
        os << "\n" << std::left << std::setw(static_cast<int>(id_width) + 2) << "agent"
           << "position\n";
        for (std::size_t i = 0; i < report.agent_ids.size(); ++i) {
            os << std::left << std::setw(static_cast<int>(id_width) + 2) << report.agent_ids[i];
            for (std::size_t k = 0; k < report.positions[i].size(); ++k) {
                if (k > 0) os << "  ";
                os << format_double(report.positions[i][k]);
            }
            os << "\n";
        }
    }

    if (report.validation) {
        os << "\nvalidation: ";
        switch (report.validation->status) {
            case ValidationOutcome::Status::Passed:
                os << "passed (vs " << report.validation->oracle << ", max discrepancy "
                   << format_double(report.validation->discrepancy) << " <= "
                   << format_double(report.validation->tolerance) << ")";
                break;
            case ValidationOutcome::Status::Failed:
                os << "FAILED (vs " << report.validation->oracle << ", max discrepancy "
                   << format_double(report.validation->discrepancy) << " > "
                   << format_double(report.validation->tolerance) << ")";
                break;
            case ValidationOutcome::Status::Unvalidatable:
                os << "unvalidatable (" << report.validation->note << ")";
                break;
        }
        os << "\n";
    }
    for (const auto& w : report.warnings) os << "warning: " << w << "\n";
    return os.str();
}

std::string render_trace_tsv(const MessagePassingReport& mp, const Scenario& scenario) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "sweep\tgood\told_price\tnew_price";
    for (const auto& a : scenario.agents) os << "\t" << a.id();
    os << "\n";
    for (const auto& r : mp.trace) {
        os << r.sweep << "\t" << scenario.space.variable(r.good).name << "=1\t" << r.old_price
           << "\t" << r.new_price;
        for (double h : r.holdings) os << "\t" << h;
        os << "\n";
    }
    return os.str();
}

} // namespace beliefmarket
