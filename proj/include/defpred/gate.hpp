#ifndef DEFPRED_GATE_HPP
#define DEFPRED_GATE_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "defpred/dataset.hpp"
#include "defpred/regress.hpp"

namespace defpred::gate {

// Model-acceptance thresholds. Predictor p-values must be strictly below
// p_max; R^2 and adjusted R^2 strictly above their minima. The intercept's
// p-value is reported but only gated when gate_intercept is set (the
// constant is not a predictor).
struct GateCriteria {
    double p_max = 0.05;
    double r2_min = 0.85;
    double adj_r2_min = 0.85;
    bool gate_intercept = false;
};

// Throws DataError unless 0 < p_max < 1 and 0 < r2_min, adj_r2_min <= 1.
void validate_criteria(const GateCriteria& c);

// One criterion line of a gate report.
struct GateItem {
    std::string criterion; // e.g. "p-value[kloc]", "r_squared"
    double value = 0;
    double threshold = 0;
    bool pass = false;
    bool gated = true; // false for report-only lines (ungated intercept)
};

struct GateReport {
    std::vector<GateItem> items;
    bool pass = false;                 // true iff every gated item passes
    std::vector<std::string> failures; // criterion names of failed gated items
};

// Evaluate a fitted model against the criteria. Degenerate perfect fits
// pass the p-value checks by the p = 0 convention (and carry their flag on
// the model itself).
GateReport evaluate_gate(const regress::FittedModel& m, const GateCriteria& c);

// One of the four published regression rounds.
struct RoundConfig {
    int id = 0;                   // 1..4
    std::string target;           // functional_defects (1,3) or all_defects (2,4)
    std::string effort_predictor; // total_effort_days (1,2) or test_design_effort_days (3,4)

    ModelSpec spec() const; // fixed predictors + the round's effort column
};

// The six predictors common to every round (kloc is always present).
const std::vector<std::string>& fixed_round_predictors();

// The four rounds in order: targets alternate functional/all; rounds 1-2
// use total effort, rounds 3-4 test-design effort.
std::array<RoundConfig, 4> enumerate_rounds();

struct RoundResult {
    RoundConfig config;
    regress::FittedModel model;
    GateReport report;
};

// Fit and gate all four rounds on the same dataset, in round order.
// Fit errors are rethrown with the round id prepended to the message.
std::vector<RoundResult> run_rounds(const dataset::Dataset& d, const GateCriteria& c);

// One verification row: a prior prediction, the later observed value, and
// the prediction interval that accompanied the prediction.
struct VerificationCase {
    std::string label;
    double predicted = 0;
    double actual = 0;
    double pi_low = 0;
    double pi_high = 0;
};

// Throws DataError unless pi_low <= pi_high and all values are >= 0/finite.
void validate_case(const VerificationCase& c);

struct CaseResult {
    VerificationCase item;
    bool predicted_in_pi = false;
    bool actual_in_pi = false;
    double relative_width = 0; // (pi_high - pi_low) / max(1, predicted)
};

struct VerificationOutcome {
    std::vector<CaseResult> cases;
    bool all_predicted_in_pi = false;
    bool all_actual_in_pi = false;
    double mean_relative_width = 0;
};

// Interval checks over one or more cases. Throws DataError on an empty list
// or a malformed interval.
VerificationOutcome verify_cases(const std::vector<VerificationCase>& cases);

// Parse the verification cases CSV (header: label,predicted,actual,pi_low,
// pi_high). Throws DataError with row locations on malformed input.
std::vector<VerificationCase> parse_cases_csv(std::string_view text);

struct Candidate {
    std::string name;
    VerificationOutcome outcome;
};

// Group cases into candidate equations by the label prefix before the last
// '/' (a label without '/' forms its own group); first-appearance order is
// preserved and each group is run through verify_cases.
std::vector<Candidate> candidates_from_cases(const std::vector<VerificationCase>& cases);

// Rank candidates: everything with all_predicted_in_pi true outranks
// anything with a miss; within a tier, ascending mean relative PI width;
// remaining ties keep declaration order. Returns indices into `candidates`
// in rank order.
std::vector<std::size_t> rank_candidates(const std::vector<Candidate>& candidates);

} // namespace defpred::gate

#endif // DEFPRED_GATE_HPP
