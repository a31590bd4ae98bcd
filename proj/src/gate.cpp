#include "defpred/gate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csv_util.hpp"
#include "defpred/errors.hpp"

namespace defpred::gate {

void validate_criteria(const GateCriteria& c) {
    if (!(c.p_max > 0.0 && c.p_max < 1.0)) {
        throw DataError("gate criteria: p_max must lie in (0, 1)");
    }
    if (!(c.r2_min > 0.0 && c.r2_min <= 1.0)) {
        throw DataError("gate criteria: r2_min must lie in (0, 1]");
    }
    if (!(c.adj_r2_min > 0.0 && c.adj_r2_min <= 1.0)) {
        throw DataError("gate criteria: adj_r2_min must lie in (0, 1]");
    }
}

GateReport evaluate_gate(const regress::FittedModel& m, const GateCriteria& c) {
    validate_criteria(c);

    GateReport report;
    for (std::size_t j = 0; j < m.term_names.size(); ++j) {
        GateItem item;
        item.criterion = "p-value[" + m.term_names[j] + "]";
        item.value = m.p_values[j];
        item.threshold = c.p_max;
        item.pass = m.p_values[j] < c.p_max; // strict, per the criteria wording
        // The constant term is not a predictor; it is reported but only
        // gated on request.
        item.gated = m.term_names[j] != "intercept" || c.gate_intercept;
        report.items.push_back(std::move(item));
    }
    report.items.push_back(
        {"r_squared", m.r_squared, c.r2_min, m.r_squared > c.r2_min, true});
    report.items.push_back({"adj_r_squared", m.adj_r_squared, c.adj_r2_min,
                            m.adj_r_squared > c.adj_r2_min, true});

    report.pass = true;
    for (const auto& item : report.items) {
        if (!item.gated) continue;
        if (!item.pass) {
            report.pass = false;
            report.failures.push_back(item.criterion);
        }
    }
    return report;
}

const std::vector<std::string>& fixed_round_predictors() {
    static const std::vector<std::string> fixed = {
        "req_error", "coding_error",     "kloc",
        "req_pages", "design_pages",     "total_test_cases",
    };
    return fixed;
}

ModelSpec RoundConfig::spec() const {
    ModelSpec s;
    s.target = target;
    s.predictors = fixed_round_predictors();
    s.predictors.push_back(effort_predictor);
    s.include_intercept = true;
    return s;
}

std::array<RoundConfig, 4> enumerate_rounds() {
    return {{
        {1, "functional_defects", "total_effort_days"},
        {2, "all_defects", "total_effort_days"},
        {3, "functional_defects", "test_design_effort_days"},
        {4, "all_defects", "test_design_effort_days"},
    }};
}

std::vector<RoundResult> run_rounds(const dataset::Dataset& d, const GateCriteria& c) {
    validate_criteria(c);
    std::vector<RoundResult> results;
    results.reserve(4);
    for (const auto& round : enumerate_rounds()) {
        RoundResult r;
        r.config = round;
        try {
            r.model = regress::fit(d, round.spec());
        } catch (const NumericError& e) {
            throw NumericError("round " + std::to_string(round.id) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("round " + std::to_string(round.id) + ": " + e.what());
        }
        r.report = evaluate_gate(r.model, c);
        results.push_back(std::move(r));
    }
    return results;
}

void validate_case(const VerificationCase& c) {
    const double values[] = {c.predicted, c.actual, c.pi_low, c.pi_high};
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DataError("verification case '" + c.label + "': non-finite value");
        }
        if (v < 0.0) {
            throw DataError("verification case '" + c.label + "': negative value");
        }
    }
    if (c.pi_low > c.pi_high) {
        throw DataError("verification case '" + c.label +
                        "': malformed interval (pi_low > pi_high)");
    }
}

VerificationOutcome verify_cases(const std::vector<VerificationCase>& cases) {
    if (cases.empty()) throw DataError("no verification cases");

    VerificationOutcome out;
    out.all_predicted_in_pi = true;
    out.all_actual_in_pi = true;
    double width_sum = 0.0;
    for (const auto& c : cases) {
        validate_case(c);
        CaseResult r;
        r.item = c;
        r.predicted_in_pi = c.pi_low <= c.predicted && c.predicted <= c.pi_high;
        r.actual_in_pi = c.pi_low <= c.actual && c.actual <= c.pi_high;
        r.relative_width = (c.pi_high - c.pi_low) / std::max(1.0, c.predicted);
        out.all_predicted_in_pi = out.all_predicted_in_pi && r.predicted_in_pi;
        out.all_actual_in_pi = out.all_actual_in_pi && r.actual_in_pi;
        width_sum += r.relative_width;
        out.cases.push_back(std::move(r));
    }
    out.mean_relative_width = width_sum / static_cast<double>(cases.size());
    return out;
}

std::vector<VerificationCase> parse_cases_csv(std::string_view text) {
    const auto lines = csv::split_lines(text);
    if (lines.empty()) throw DataError("empty document: missing header row");

    static const char* expected[] = {"label", "predicted", "actual", "pi_low", "pi_high"};
    const auto header = csv::split_fields(lines[0]);
    if (header.size() != 5) {
        throw DataError("invalid cases header: expected 5 columns "
                        "(label,predicted,actual,pi_low,pi_high), found " +
                        std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < 5; ++i) {
        if (header[i] != expected[i]) {
            throw DataError("invalid cases header: expected column '" +
                            std::string(expected[i]) + "' at position " +
                            std::to_string(i + 1) + " (found '" +
                            std::string(header[i]) + "')");
        }
    }

    std::vector<VerificationCase> cases;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string row_label = "row " + std::to_string(li);
        if (lines[li].empty()) throw DataError(row_label + ": blank line");
        const auto cells = csv::split_fields(lines[li]);
        if (cells.size() != 5) {
            throw DataError(row_label + ": expected 5 cells, found " +
                            std::to_string(cells.size()));
        }
        VerificationCase c;
        c.label = std::string(cells[0]);
        if (c.label.empty()) throw DataError(row_label + ": empty label");
        double* fields[] = {&c.predicted, &c.actual, &c.pi_low, &c.pi_high};
        for (std::size_t i = 0; i < 4; ++i) {
            if (!csv::parse_number(cells[i + 1], *fields[i])) {
                throw DataError(row_label + ", column '" + expected[i + 1] +
                                "': non-numeric cell '" + std::string(cells[i + 1]) + "'");
            }
        }
        try {
            validate_case(c);
        } catch (const DataError& e) {
            throw DataError(row_label + ": " + e.what());
        }
        cases.push_back(std::move(c));
    }
    if (cases.empty()) throw DataError("empty cases file: header without data rows");
    return cases;
}

std::vector<Candidate> candidates_from_cases(const std::vector<VerificationCase>& cases) {
    if (cases.empty()) throw DataError("no verification cases");

    std::vector<std::string> names;
    std::vector<std::vector<VerificationCase>> groups;
    for (const auto& c : cases) {
        const std::size_t slash = c.label.rfind('/');
        const std::string name =
            slash == std::string::npos ? c.label : c.label.substr(0, slash);
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            names.push_back(name);
            groups.emplace_back();
            groups.back().push_back(c);
        } else {
            groups[static_cast<std::size_t>(it - names.begin())].push_back(c);
        }
    }
    std::vector<Candidate> out;
    out.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.push_back({names[i], verify_cases(groups[i])});
    }
    return out;
}

std::vector<std::size_t> rank_candidates(const std::vector<Candidate>& candidates) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable sort keeps declaration order for exact ties.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& oa = candidates[a].outcome;
        const auto& ob = candidates[b].outcome;
        if (oa.all_predicted_in_pi != ob.all_predicted_in_pi) {
            return oa.all_predicted_in_pi; // all-in-PI tier first
        }
        return oa.mean_relative_width < ob.mean_relative_width;
    });
    return order;
}

} // namespace defpred::gate
