// Command-line front end: scenario ingestion, solver dispatch, reports.
//
// Verbs:
//   run       solve a scenario, print a table, persist a JSON report
//   validate  run plus an independent oracle comparison (or --random N)
//   trace     message-passing run with a per-(sweep,good) TSV trace
//   oracle    invoke a brute-force oracle directly
//
// Exit codes: 0 success, 1 non-convergence, 2 validation failure, 3 input error.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "beliefmarket/errors.hpp"
#include "beliefmarket/oracle.hpp"
#include "beliefmarket/runner.hpp"
#include "beliefmarket/scenario.hpp"

namespace {

using beliefmarket::Scenario;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNoConvergence = 1;
constexpr int kExitValidationFailure = 2;
constexpr int kExitInputError = 3;

struct Overrides {
    double tolerance = -1.0;      // <0 = keep scenario value
    std::uint64_t max_iters = 0;  // 0 = keep scenario value
    bool smooth = false;
    double smooth_eps = 1e-9;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw beliefmarket::ParseError("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw beliefmarket::ParseError("cannot write file '" + path + "'");
    out << text;
}

// Applies CLI overrides to the raw document so the canonical scenario (and
// its digest) reflects what actually ran; reports then round-trip exactly.
Scenario load_with_overrides(const std::string& path, const Overrides& ov) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw beliefmarket::ParseError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (ov.tolerance >= 0.0 || ov.max_iters > 0) {
        if (!doc.contains("solver") || doc["solver"].is_string()) {
            json solver = json::object();
            if (doc.contains("solver")) solver["kind"] = doc["solver"];
            doc["solver"] = solver;
        }
        if (ov.tolerance >= 0.0) doc["solver"]["params"]["tolerance"] = ov.tolerance;
        if (ov.max_iters > 0) {
            doc["solver"]["params"]["max_iterations"] = ov.max_iters;
            doc["solver"]["params"]["max_sweeps"] = ov.max_iters;
        }
    }
    if (ov.smooth && doc.contains("agents") && doc["agents"].is_array()) {
        for (auto& agent : doc["agents"]) {
            if (!agent.is_object() || !agent.contains("belief")) continue;
            auto& belief = agent["belief"];
            if (!belief.is_object() || belief.value("log", false)) continue;
            if (!belief.contains("table") || !belief["table"].is_array()) continue;
            bool has_zero = false;
            for (const auto& v : belief["table"]) {
                if (v.is_number() && v.get<double>() == 0.0) has_zero = true;
            }
            if (!has_zero) continue;
            for (auto& v : belief["table"]) {
                if (v.is_number()) v = v.get<double>() + ov.smooth_eps;
            }
        }
    }
    return beliefmarket::parse_scenario(doc.dump());
}

std::string default_report_path(const std::string& scenario_path) {
    return scenario_path + ".report.json";
}

int finish_run(const beliefmarket::RunReport& report, const Scenario& scenario,
               const std::string& scenario_path, const std::string& report_path) {
    const std::string path = report_path.empty() ? default_report_path(scenario_path) : report_path;
    write_file(path, beliefmarket::report_to_json(report, scenario));
    std::cout << beliefmarket::render_report(report);
    std::cout << "report written to " << path << "\n";
    if (report.validation &&
        report.validation->status == beliefmarket::ValidationOutcome::Status::Failed) {
        return kExitValidationFailure;
    }
    if (!report.converged) return kExitNoConvergence;
    return kExitOk;
}

// Random homogeneous markets for `validate --random`: the only place the
// --seed flag matters; every solver itself is deterministic.
json random_scenario(std::mt19937& rng) {
    std::uniform_int_distribution<int> goods_dist(2, 3), agents_dist(1, 4), kind_dist(0, 1);
    std::uniform_real_distribution<double> wealth_dist(0.5, 5.0), mass_dist(0.1, 1.0);
    const int goods = goods_dist(rng);
    const int n_agents = agents_dist(rng);
    const bool log_kind = kind_dist(rng) == 1;

    json doc;
    doc["space"]["variables"] = json::array({{{"name", "y"}, {"cardinality", goods}}});
    doc["market"] = "joint";
    doc["solver"] = "auto";
    json agents = json::array();
    for (int i = 0; i < n_agents; ++i) {
        json belief_table = json::array();
        for (int k = 0; k < goods; ++k) belief_table.push_back(mass_dist(rng));
        agents.push_back({{"id", "a" + std::to_string(i + 1)},
                          {"utility", log_kind ? "log" : "exp"},
                          {"wealth", wealth_dist(rng)},
                          {"style", "full_joint"},
                          {"belief",
                           {{"order", "row_major_last_fastest"}, {"table", belief_table}}}});
    }
    doc["agents"] = agents;
    return doc;
}

int run_random_validation(int count, std::uint64_t seed) {
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    int failures = 0, non_converged = 0;
    for (int i = 1; i <= count; ++i) {
        const json doc = random_scenario(rng);
        const Scenario scenario = beliefmarket::parse_scenario(doc.dump());
        const beliefmarket::RunReport report = beliefmarket::validate_scenario(scenario);
        std::cout << "random scenario " << i << " [" << report.solver_used << ", "
                  << report.prices.size() << " goods, " << report.agent_ids.size()
                  << " agents]: ";
        if (!report.validation) {
            std::cout << "no validation outcome\n";
            ++failures;
            continue;
        }
        switch (report.validation->status) {
            case beliefmarket::ValidationOutcome::Status::Passed:
                std::cout << "passed (discrepancy " << report.validation->discrepancy << " <= "
                          << report.validation->tolerance << " vs " << report.validation->oracle
                          << ")\n";
                break;
            case beliefmarket::ValidationOutcome::Status::Failed:
                std::cout << "FAILED (discrepancy " << report.validation->discrepancy << " > "
                          << report.validation->tolerance << " vs " << report.validation->oracle
                          << ")\n";
                ++failures;
                break;
            case beliefmarket::ValidationOutcome::Status::Unvalidatable:
                std::cout << "unvalidatable (" << report.validation->note << ")\n";
                break;
        }
        if (!report.converged) ++non_converged;
    }
    if (failures > 0) return kExitValidationFailure;
    if (non_converged > 0) return kExitNoConvergence;
    return kExitOk;
}

int run_oracle(const Scenario& scenario, std::string kind, double resolution) {
    using beliefmarket::AgentStyle;
    if (kind == "auto") {
        if (scenario.market == beliefmarket::MarketKind::Restricted) {
            kind = "marginals";
        } else {
            const bool any_niche =
                std::any_of(scenario.agents.begin(), scenario.agents.end(),
                            [](const auto& a) { return a.style() == AgentStyle::Niche; });
            kind = any_niche ? "product" : "equilibrium";
        }
    }

    json out;
    out["oracle"] = kind;
    if (kind == "equilibrium") {
        out["prices"] =
            beliefmarket::brute_force_equilibrium(scenario.agents, scenario.space, resolution);
        out["resolution"] = resolution;
    } else if (kind == "product") {
        std::optional<beliefmarket::Belief> base;
        std::vector<beliefmarket::FactorTable> factors;
        for (const auto& a : scenario.agents) {
            if (a.style() == AgentStyle::Niche) {
                factors.push_back(a.factor());
            } else if (a.style() == AgentStyle::FullJoint && !base) {
                base = a.belief();
            } else {
                throw beliefmarket::ValidationError(
                    "product oracle needs at most one full-joint base plus niche agents");
            }
        }
        const beliefmarket::Belief product = beliefmarket::brute_force_joint_product(
            scenario.space, base, factors, scenario.joint_cap);
        out["belief"] = product.probabilities();
    } else if (kind == "marginals") {
        const auto& agent = scenario.agents.front();
        if (agent.style() != AgentStyle::FullJoint) {
            throw beliefmarket::ValidationError("marginals oracle needs a full-joint first agent");
        }
        const auto marginals = beliefmarket::exact_marginals(agent.belief(), scenario.space);
        json m = json::object();
        for (int j = 0; j < scenario.space.num_variables(); ++j) {
            m[scenario.space.variable(j).name] =
                marginals[static_cast<std::size_t>(j)].probabilities();
        }
        out["marginals"] = m;
        out["agent"] = agent.id();
    } else {
        throw beliefmarket::ValidationError("unknown oracle kind '" + kind +
                                            "' (expected equilibrium, product, marginals)");
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"utility-maximizing agents trading outcome bets: equilibrium prices as "
                 "model combinations"};
    app.require_subcommand(1);

    Overrides overrides;
    std::uint64_t seed = 12345;
    app.add_option("--tolerance", overrides.tolerance,
                   "override the solver tolerance from the scenario");
    app.add_option("--max-iters", overrides.max_iters,
                   "override the iteration / sweep cap from the scenario");
    app.add_option("--seed", seed, "seed for randomized scenario generation (validate --random)");
    app.add_flag("--smooth", overrides.smooth,
                 "epsilon-smooth belief tables containing zeros before solving");
    app.add_option("--smooth-eps", overrides.smooth_eps, "smoothing epsilon (implies --smooth)")
        ->default_val(1e-9);

    std::string scenario_path, report_path, trace_path, oracle_kind = "auto";
    int random_count = 0;
    double resolution = 1e-3;

    CLI::App* run_cmd = app.add_subcommand("run", "solve a scenario and persist the report");
    run_cmd->add_option("scenario", scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--report", report_path, "report output path (default <scenario>.report.json)");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "run and compare against the matching oracle");
    validate_cmd->add_option("scenario", scenario_path, "scenario JSON file")
        ->check(CLI::ExistingFile);
    validate_cmd->add_option("--report", report_path, "report output path");
    validate_cmd->add_option("--random", random_count,
                             "validate this many randomly generated homogeneous markets");

    CLI::App* trace_cmd =
        app.add_subcommand("trace", "message-passing run with per-sweep TSV trace");
    trace_cmd->add_option("scenario", scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    trace_cmd->add_option("--out", trace_path, "trace output path (default stdout)");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "invoke a brute-force oracle directly");
    oracle_cmd->add_option("scenario", scenario_path, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    oracle_cmd->add_option("--kind", oracle_kind, "equilibrium | product | marginals | auto");
    oracle_cmd->add_option("--resolution", resolution, "equilibrium grid resolution (>= 1e-3)");

    // Global overrides may appear before or after the verb.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints the message / help text
        return code == 0 ? kExitOk : kExitInputError;
    }
    if (app.count("--smooth-eps") > 0) overrides.smooth = true;

    try {
        if (run_cmd->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, overrides);
            const beliefmarket::RunReport report = beliefmarket::run_scenario(scenario);
            return finish_run(report, scenario, scenario_path, report_path);
        }
        if (validate_cmd->parsed()) {
            if (random_count > 0) return run_random_validation(random_count, seed);
            if (scenario_path.empty()) {
                std::cerr << "error: validate needs a scenario file or --random N\n";
                return kExitInputError;
            }
            const Scenario scenario = load_with_overrides(scenario_path, overrides);
            const beliefmarket::RunReport report = beliefmarket::validate_scenario(scenario);
            return finish_run(report, scenario, scenario_path, report_path);
        }
        if (trace_cmd->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, overrides);
            const beliefmarket::MessagePassingReport mp = beliefmarket::trace_scenario(scenario);
            const std::string tsv = beliefmarket::render_trace_tsv(mp, scenario);
            if (trace_path.empty()) {
                std::cout << tsv;
            } else {
                write_file(trace_path, tsv);
                std::cout << "trace written to " << trace_path << " (" << mp.sweeps
                          << " sweeps, converged: " << (mp.converged ? "yes" : "no") << ")\n";
            }
            return mp.converged ? kExitOk : kExitNoConvergence;
        }
        if (oracle_cmd->parsed()) {
            const Scenario scenario = load_with_overrides(scenario_path, overrides);
            return run_oracle(scenario, oracle_kind, resolution);
        }
    } catch (const beliefmarket::MarketError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
