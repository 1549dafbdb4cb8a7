#pragma once

#include <optional>
#include <string>
#include <vector>

#include "beliefmarket/message_passing.hpp"
#include "beliefmarket/scenario.hpp"

namespace beliefmarket {

struct ValidationOutcome {
    enum class Status { Passed, Failed, Unvalidatable };
    Status status = Status::Unvalidatable;
    std::string oracle;     // which oracle was compared against
    double discrepancy = 0; // max absolute price difference
    double tolerance = 0;
    std::string note;
};

struct RunReport {
    std::string digest;
    std::string solver_used;
    std::vector<std::string> good_labels;
    PriceVector prices;
    std::vector<std::string> agent_ids;
    std::vector<std::vector<double>> positions; // [agent][good]
    double residual = 0.0;
    std::uint64_t iterations = 0; // tatonnement iterations or sweeps
    bool converged = false;
    double wall_time_seconds = 0.0;
    std::vector<std::string> warnings;
    std::optional<ValidationOutcome> validation;
};

// Dispatch the scenario to its solver (auto rules: homogeneous log/exp ->
// closed forms, base+niche -> factor product, all-linear one binary variable
// -> weighted median, restricted -> message passing, otherwise tatonnement).
RunReport run_scenario(const Scenario& scenario);

// run_scenario plus the matching oracle comparison; refusals surface as an
// Unvalidatable status, never an exception.
RunReport validate_scenario(const Scenario& scenario, double closed_form_tolerance = 1e-6,
                            double grid_tolerance = 1e-3);

// Message-passing run with the full sweep trace (restricted markets only).
MessagePassingReport trace_scenario(const Scenario& scenario);

// Report persistence: JSON with the canonical scenario embedded, so a reload
// can re-run and reproduce prices bit-identically. Reload verifies that the
// stored digest matches the embedded scenario.
std::string report_to_json(const RunReport& report, const Scenario& scenario);
RunReport report_from_json(const std::string& text,
                           std::optional<Scenario>* scenario_out = nullptr);

// Aligned human-readable table.
std::string render_report(const RunReport& report);

// One row per (sweep, good): sweep, good label, old price, new price, then
// one holdings column per agent.
std::string render_trace_tsv(const MessagePassingReport& mp, const Scenario& scenario);

} // namespace beliefmarket
