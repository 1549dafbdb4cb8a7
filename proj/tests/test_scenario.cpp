#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "beliefmarket/errors.hpp"
#include "beliefmarket/runner.hpp"
#include "beliefmarket/scenario.hpp"

using namespace beliefmarket;

namespace {

const std::string kMinimal = R"({
  "space": { "variables": [ { "name": "y" } ] },
  "agents": [
    { "id": "a", "utility": "log",
      "belief": { "order": "row_major_last_fastest", "table": [0.3, 0.7] } }
  ]
})";

std::string with_table(const std::string& table_json) {
    return R"({
      "space": { "variables": [ { "name": "y" } ] },
      "agents": [
        { "id": "a", "utility": "log", "belief": )" +
           table_json + R"( }
      ]
    })";
}

} // namespace

TEST_CASE("a minimal scenario loads with defaults") {
    auto s = parse_scenario(kMinimal);
    CHECK(s.market == MarketKind::Joint);
    CHECK(s.solver.kind == SolverKind::Auto);
    CHECK(s.space.num_joint_states() == 2); // cardinality defaults to 2
    REQUIRE(s.agents.size() == 1);
    CHECK(s.agents[0].wealth() == 1.0);
    CHECK(s.warnings.empty());

    auto report = run_scenario(s);
    CHECK(report.solver_used == "closed_form_log");
    CHECK(report.prices[1] == Catch::Approx(0.7).margin(1e-15));
    CHECK(report.good_labels == std::vector<std::string>{"(0)", "(1)"});
}

TEST_CASE("parse failures carry diagnostics") {
    CHECK_THROWS_AS(parse_scenario("not json"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[1,2]"), ParseError);
    CHECK_THROWS_AS(parse_scenario("{}"), ValidationError);
    CHECK_THROWS_AS(parse_scenario(R"({"space": {"variables": []}, "agents": []})"),
                    ValidationError);
}

TEST_CASE("an undeclared clique variable is named in the error") {
    const std::string text = R"({
      "space": { "variables": [ { "name": "y1" }, { "name": "y2" } ] },
      "agents": [
        { "id": "n", "style": "niche", "clique": ["z"],
          "factor": { "order": "row_major_last_fastest", "table": [1.0, 2.0] } }
      ]
    })";
    try {
        parse_scenario(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("'z'") != std::string::npos);
    }
}

TEST_CASE("near-normalized tables load with a warning") {
    auto s = parse_scenario(with_table(
        R"({ "order": "row_major_last_fastest", "table": [0.28, 0.7] })"));
    REQUIRE_FALSE(s.warnings.empty());
    CHECK(s.warnings[0].find("normalized") != std::string::npos);
    CHECK(s.agents[0].belief().probability(1) == Catch::Approx(0.7 / 0.98));

    auto clean = parse_scenario(with_table(
        R"({ "order": "row_major_last_fastest", "table": [0.3, 0.7] })"));
    CHECK(clean.warnings.empty());
}

TEST_CASE("tables must declare the state order") {
    CHECK_THROWS_AS(parse_scenario(with_table(R"({ "table": [0.3, 0.7] })")), ValidationError);
    CHECK_THROWS_AS(
        parse_scenario(with_table(R"({ "order": "column_major", "table": [0.3, 0.7] })")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_scenario(with_table(R"({ "order": "row_major_last_fastest", "table": [] })")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_scenario(with_table(R"({ "order": "row_major_last_fastest", "table": [0.2, 0.3, 0.5] })")),
        ValidationError);
}

TEST_CASE("log-domain tables decode to the same distribution") {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto lin = parse_scenario(with_table(
        R"({ "order": "row_major_last_fastest", "table": [0.3, 0.7] })"));
    auto lg = parse_scenario(with_table(
        R"({ "order": "row_major_last_fastest", "log": true, "table": [)" +
        fmt(std::log(0.3)) + "," + fmt(std::log(0.7)) + "] }"));
    CHECK(lg.warnings.empty());
    CHECK(lg.agents[0].belief().probability(1) ==
          Catch::Approx(lin.agents[0].belief().probability(1)).epsilon(1e-12));

    // An unnormalized log table (log-odds style) still decodes, with a warning.
    auto odds = parse_scenario(with_table(
        R"({ "order": "row_major_last_fastest", "log": true, "table": [0.0, 0.84729786038720367] })"));
    REQUIRE_FALSE(odds.warnings.empty());
    CHECK(odds.agents[0].belief().probability(1) == Catch::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("duplicate agent ids are rejected") {
    const std::string text = R"({
      "space": { "variables": [ { "name": "y" } ] },
      "agents": [
        { "id": "a", "utility": "log",
          "belief": { "order": "row_major_last_fastest", "table": [0.5, 0.5] } },
        { "id": "a", "utility": "log",
          "belief": { "order": "row_major_last_fastest", "table": [0.5, 0.5] } }
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(text), ValidationError);
}

TEST_CASE("market and solver compatibility rules") {
    const std::string restricted_log = R"({
      "space": { "variables": [ { "name": "y1" }, { "name": "y2" } ] },
      "market": "restricted",
      "agents": [
        { "id": "a", "utility": "log",
          "belief": { "order": "row_major_last_fastest", "table": [0.25, 0.25, 0.25, 0.25] } }
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(restricted_log), ValidationError);

    const std::string joint_mp = R"({
      "space": { "variables": [ { "name": "y" } ] },
      "market": "joint",
      "solver": "message_passing",
      "agents": [
        { "id": "a", "utility": "exp",
          "belief": { "order": "row_major_last_fastest", "table": [0.5, 0.5] } }
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(joint_mp), ValidationError);

    const std::string restricted_ternary = R"({
      "space": { "variables": [ { "name": "y", "cardinality": 3 } ] },
      "market": "restricted",
      "agents": [
        { "id": "a", "utility": "exp",
          "belief": { "order": "row_major_last_fastest", "table": [0.2, 0.3, 0.5] } }
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(restricted_ternary), ValidationError);
}

TEST_CASE("huge joint markets are refused with advice") {
    std::string vars;
    for (int i = 1; i <= 25; ++i) {
        if (i > 1) vars += ",";
        vars += R"({ "name": "y)" + std::to_string(i) + R"(" })";
    }
    const std::string text = R"({
      "space": { "variables": [)" + vars + R"(] },
      "market": "joint",
      "agents": [
        { "id": "m", "style": "marginal", "clique": ["y1"],
          "belief": { "order": "row_major_last_fastest", "table": [0.4, 0.6] } }
      ]
    })";
    try {
        parse_scenario(text);
        FAIL("expected refusal");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("restricted") != std::string::npos);
    }
}

TEST_CASE("digest is stable across formatting and sensitive to content") {
    auto a = parse_scenario(kMinimal);
    std::string reformatted = kMinimal;
    reformatted.insert(reformatted.find('{') + 1, "\n\n   ");
    auto b = parse_scenario(reformatted);
    CHECK(scenario_digest(a) == scenario_digest(b));
    CHECK(scenario_digest(a).rfind("fnv1a64:", 0) == 0);
    CHECK(scenario_digest(a).size() == 8 + 16);

    std::string changed = kMinimal;
    auto pos = changed.find("0.3");
    changed.replace(pos, 3, "0.4");
    auto pos2 = changed.find("0.7");
    changed.replace(pos2, 3, "0.6");
    CHECK(scenario_digest(parse_scenario(changed)) != scenario_digest(a));
}

TEST_CASE("solver parameters flow through") {
    const std::string text = R"({
      "space": { "variables": [ { "name": "y" } ] },
      "solver": { "kind": "tatonnement",
                  "params": { "step_size": 0.05, "tolerance": 1e-7, "max_iterations": 500,
                              "init": [0.4, 0.6] } },
      "agents": [
        { "id": "a", "utility": "log",
          "belief": { "order": "row_major_last_fastest", "table": [0.3, 0.7] } }
      ]
    })";
    auto s = parse_scenario(text);
    CHECK(s.solver.kind == SolverKind::Tatonnement);
    CHECK(s.solver.tatonnement.step_size == 0.05);
    CHECK(s.solver.tatonnement.tolerance == 1e-7);
    CHECK(s.solver.tatonnement.max_iterations == 500);
    REQUIRE(s.solver.init.has_value());
    CHECK((*s.solver.init)[1] == 0.6);

    auto report = run_scenario(s);
    CHECK(report.solver_used == "tatonnement");
    CHECK(report.converged);
    CHECK(report.prices[1] == Catch::Approx(0.7).margin(1e-6));
}

TEST_CASE("reports round-trip bit-identically") {
    auto scenario = load_scenario(std::string(SCENARIO_DIR) + "/mixture_three_log.json");
    auto report = run_scenario(scenario);
    auto text = report_to_json(report, scenario);

    std::optional<Scenario> embedded;
    auto loaded = report_from_json(text, &embedded);
    REQUIRE(embedded.has_value());
    CHECK(loaded.digest == report.digest);
    CHECK(loaded.prices == report.prices); // bitwise through shortest-repr doubles
    CHECK(loaded.positions == report.positions);
    CHECK(loaded.solver_used == report.solver_used);

    auto rerun = run_scenario(*embedded);
    REQUIRE(rerun.prices.size() == report.prices.size());
    CHECK(std::memcmp(rerun.prices.data(), report.prices.data(),
                      report.prices.size() * sizeof(double)) == 0);
    CHECK(scenario_digest(*embedded) == report.digest);
}

TEST_CASE("tampered reports are rejected") {
    auto scenario = load_scenario(std::string(SCENARIO_DIR) + "/mixture_three_log.json");
    auto report = run_scenario(scenario);
    auto text = report_to_json(report, scenario);
    auto pos = text.find("\"wealth\": 2.0");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 13, "\"wealth\": 3.0");
    CHECK_THROWS_AS(report_from_json(text), ValidationError);
}

TEST_CASE("validation statuses") {
    auto mixture = load_scenario(std::string(SCENARIO_DIR) + "/mixture_three_log.json");
    auto v = validate_scenario(mixture);
    REQUIRE(v.validation.has_value());
    CHECK(v.validation->status == ValidationOutcome::Status::Passed);
    CHECK(v.validation->oracle == "brute_force_equilibrium");

    auto factor = load_scenario(std::string(SCENARIO_DIR) + "/factor_product.json");
    auto fv = validate_scenario(factor);
    REQUIRE(fv.validation.has_value());
    CHECK(fv.validation->status == ValidationOutcome::Status::Passed);
    CHECK(fv.validation->oracle == "brute_force_joint_product");
    CHECK(fv.validation->discrepancy <= 1e-12);

    auto median = load_scenario(std::string(SCENARIO_DIR) + "/weighted_median.json");
    auto mv = validate_scenario(median);
    REQUIRE(mv.validation.has_value());
    CHECK(mv.validation->status == ValidationOutcome::Status::Passed);
    CHECK(mv.validation->oracle == "cumulative_wealth_median");
    CHECK(mv.validation->discrepancy == 0.0);

    auto chain = load_scenario(std::string(SCENARIO_DIR) + "/restricted_chain_25var.json");
    auto cv = validate_scenario(chain);
    REQUIRE(cv.validation.has_value());
    CHECK(cv.validation->status == ValidationOutcome::Status::Unvalidatable);
    CHECK(cv.converged); // the run itself still succeeds
}

TEST_CASE("restricted single-agent scenario validates against exact marginals") {
    auto s = load_scenario(std::string(SCENARIO_DIR) + "/restricted_single_exp.json");
    auto report = validate_scenario(s);
    CHECK(report.solver_used == "message_passing");
    CHECK(report.prices[0] == Catch::Approx(0.6).margin(1e-8));
    CHECK(report.prices[1] == Catch::Approx(0.5).margin(1e-8));
    CHECK(report.good_labels == std::vector<std::string>{"y1=1", "y2=1"});
    REQUIRE(report.validation.has_value());
    CHECK(report.validation->status == ValidationOutcome::Status::Passed);
    CHECK(report.validation->oracle == "exact_marginals");
}

TEST_CASE("traces cover every sweep and agent") {
    auto s = load_scenario(std::string(SCENARIO_DIR) + "/restricted_single_exp.json");
    auto mp = trace_scenario(s);
    REQUIRE(mp.converged);
    auto tsv = render_trace_tsv(mp, s);
    CHECK(tsv.rfind("sweep\tgood\told_price\tnew_price\tsolo", 0) == 0);
    std::size_t rows = 0;
    for (char c : tsv) rows += c == '\n';
    CHECK(rows == 1 + mp.trace.size());
    CHECK(tsv.find("y1=1") != std::string::npos);

    auto joint = load_scenario(std::string(SCENARIO_DIR) + "/mixture_three_log.json");
    CHECK_THROWS_AS(trace_scenario(joint), ValidationError);
}

TEST_CASE("the human-readable report includes labels, prices, and warnings") {
    auto s = load_scenario(std::string(SCENARIO_DIR) + "/product_two_exp.json");
    auto report = run_scenario(s);
    auto text = render_report(report);
    CHECK(text.find("closed_form_exp") != std::string::npos);
    CHECK(text.find("(1)") != std::string::npos);
    CHECK(text.find("0.75") != std::string::npos);
    CHECK(text.find("sharp") != std::string::npos);
    CHECK(text.find("converged:  yes") != std::string::npos);
}

TEST_CASE("bundled scenarios all load, run, and stay arbitrage-free") {
    const char* names[] = {"mixture_three_log.json",    "product_two_exp.json",
                           "factor_product.json",       "linear_median.json",
                           "weighted_median.json",      "restricted_single_exp.json",
                           "mixed_tatonnement.json",    "marginal_in_joint.json",
                           "restricted_chain_25var.json"};
    for (const char* name : names) {
        INFO(name);
        auto s = load_scenario(std::string(SCENARIO_DIR) + "/" + name);
        auto report = run_scenario(s);
        CHECK(report.converged);
        if (s.market == MarketKind::Joint) {
            double sum = 0;
            for (double c : report.prices) sum += c;
            CHECK(std::abs(sum - 1.0) <= 1e-10);
        } else {
            for (double c : report.prices) {
                CHECK(c > 0.0);
                CHECK(c < 1.0);
            }
        }
    }
}
