#include "defpred/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "csv_util.hpp"
#include "defpred/errors.hpp"

namespace defpred::dataset {

namespace {

struct ColumnAccessor {
    const char* name;
    double MetricRecord::* field;
};

constexpr ColumnAccessor accessors[] = {
    {"req_error", &MetricRecord::req_error},
    {"design_error", &MetricRecord::design_error},
    {"coding_error", &MetricRecord::coding_error},
    {"kloc", &MetricRecord::kloc},
    {"req_pages", &MetricRecord::req_pages},
    {"design_pages", &MetricRecord::design_pages},
    {"total_test_cases", &MetricRecord::total_test_cases},
    {"test_case_error", &MetricRecord::test_case_error},
    {"total_effort_days", &MetricRecord::total_effort_days},
    {"test_design_effort_days", &MetricRecord::test_design_effort_days},
    {"functional_defects", &MetricRecord::functional_defects},
    {"all_defects", &MetricRecord::all_defects},
};

double MetricRecord::* find_column(const std::string& name) {
    for (const auto& a : accessors) {
        if (name == a.name) return a.field;
    }
    return nullptr;
}

// Shortest text that parses back to exactly the same double; keeps emitted
// CSV clean while preserving the parse/emit round trip bit-for-bit.
std::string format_value(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string csv_header() {
    std::string h = "project_id";
    for (const char* c : numeric_columns) {
        h += ',';
        h += c;
    }
    return h;
}

const std::vector<FactorEntry>& factor_catalog() {
    static const std::vector<FactorEntry> catalog = {
        {FactorArea::software_complexity, "Number of requirement pages", true, {"req_pages"}},
        {FactorArea::software_complexity, "Number of design pages", true, {"design_pages"}},
        {FactorArea::software_complexity, "Type of programming language", false, {}},
        {FactorArea::software_complexity, "Code size", true, {"kloc"}},
        {FactorArea::knowledge, "Developer knowledge", false, {}},
        {FactorArea::knowledge, "Tester knowledge", false, {}},
        {FactorArea::test_process, "Test case coverage", false, {}},
        {FactorArea::test_process, "Total test cases", true, {"total_test_cases"}},
        {FactorArea::test_process, "Test automation rate", false, {}},
        {FactorArea::test_process, "Test case execution productivity", false, {}},
        {FactorArea::test_process, "Total effort in test case design", true, {"test_design_effort_days"}},
        {FactorArea::test_process, "Total effort in phases prior to system testing", true, {"total_effort_days"}},
        {FactorArea::errors, "Requirement error", true, {"req_error"}},
        {FactorArea::errors, "Design error", true, {"design_error"}},
        {FactorArea::errors, "Code error", true, {"coding_error"}},
        {FactorArea::errors, "Test plan error", false, {}},
        {FactorArea::errors, "Test cases error", true, {"test_case_error"}},
        {FactorArea::fault, "Requirement fault", false, {}},
        {FactorArea::fault, "Design fault", false, {}},
        {FactorArea::fault, "Code fault", false, {}},
        {FactorArea::fault, "Integration fault", false, {}},
        {FactorArea::fault, "Test cases fault", false, {}},
        {FactorArea::defect, "Severity of defect", false, {}},
        {FactorArea::defect, "Type/category of defect", false, {}},
        {FactorArea::defect, "Validity of defect", false, {}},
        {FactorArea::defect, "Total defects logged", true, {"functional_defects", "all_defects"}},
        {FactorArea::type_of_software, "Component-based", false, {}},
        {FactorArea::type_of_software, "Web-based", false, {}},
    };
    return catalog;
}

void validate_record(const MetricRecord& r, const std::string& row_label) {
    for (const auto& a : accessors) {
        const double v = r.*(a.field);
        if (!std::isfinite(v)) {
            throw DataError(row_label + ", column '" + a.name + "': non-finite value");
        }
        if (v < 0.0) {
            throw DataError(row_label + ", column '" + a.name + "': negative value");
        }
    }
    if (r.functional_defects > r.all_defects) {
        throw DataError(row_label + ": functional_defects exceeds all_defects");
    }
    if (r.test_design_effort_days > r.total_effort_days) {
        throw DataError(row_label + ": test_design_effort_days exceeds total_effort_days");
    }
}

Dataset parse_csv(std::string_view text, std::string_view source) {
    const auto lines = csv::split_lines(text);
    if (lines.empty()) throw DataError("empty document: missing header row");

    const auto header = csv::split_fields(lines[0]);
    const std::size_t expected_cols = 1 + numeric_columns.size();
    if (header.size() != expected_cols) {
        throw DataError("invalid header: expected " + std::to_string(expected_cols) +
                        " columns (" + csv_header() + "), found " +
                        std::to_string(header.size()));
    }
    if (header[0] != "project_id") {
        throw DataError("invalid header: expected column 'project_id' first, found '" +
                        std::string(header[0]) + "'");
    }
    for (std::size_t i = 0; i < numeric_columns.size(); ++i) {
        if (header[i + 1] != numeric_columns[i]) {
            throw DataError("invalid header: missing column '" +
                            std::string(numeric_columns[i]) + "' at position " +
                            std::to_string(i + 2) + " (found '" +
                            std::string(header[i + 1]) + "')");
        }
    }

    Dataset d;
    d.source = std::string(source);
    std::set<std::string> ids;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string row_label = "row " + std::to_string(li);
        if (lines[li].empty()) throw DataError(row_label + ": blank line");
        const auto cells = csv::split_fields(lines[li]);
        if (cells.size() != expected_cols) {
            throw DataError(row_label + ": expected " + std::to_string(expected_cols) +
                            " cells, found " + std::to_string(cells.size()));
        }
        MetricRecord r;
        r.project_id = std::string(cells[0]);
        if (r.project_id.empty()) throw DataError(row_label + ": empty project_id");
        for (std::size_t i = 0; i < numeric_columns.size(); ++i) {
            double v = 0.0;
            if (!csv::parse_number(cells[i + 1], v)) {
                throw DataError(row_label + ", column '" + numeric_columns[i] +
                                "': non-numeric cell '" + std::string(cells[i + 1]) + "'");
            }
            r.*(find_column(numeric_columns[i])) = v;
        }
        validate_record(r, row_label + " (" + r.project_id + ")");
        if (!ids.insert(r.project_id).second) {
            throw DataError(row_label + ": duplicate project_id '" + r.project_id + "'");
        }
        d.records.push_back(std::move(r));
    }
    if (d.records.empty()) throw DataError("empty dataset: header without data rows");
    return d;
}

std::string emit_csv(const Dataset& d) {
    std::string out = csv_header();
    out += '\n';
    for (const auto& r : d.records) {
        out += r.project_id;
        for (const auto& a : accessors) {
            out += ',';
            out += format_value(r.*(a.field));
        }
        out += '\n';
    }
    return out;
}

std::vector<double> numeric_column(const Dataset& d, const std::string& name) {
    const auto field = find_column(name);
    if (field == nullptr) throw DataError("unknown column '" + name + "'");
    std::vector<double> v;
    v.reserve(d.records.size());
    for (const auto& r : d.records) v.push_back(r.*field);
    return v;
}

DesignMatrix design_matrix(const Dataset& d, const ModelSpec& spec) {
    validate_spec(spec);
    const std::size_t n = d.records.size();
    if (n == 0) throw DataError("empty dataset");

    const std::size_t p = spec.predictors.size() + (spec.include_intercept ? 1 : 0);
    DesignMatrix dm{numerics::Matrix(n, p), numeric_column(d, spec.target)};
    std::size_t col = 0;
    if (spec.include_intercept) {
        for (std::size_t i = 0; i < n; ++i) dm.x(i, col) = 1.0;
        ++col;
    }
    for (const auto& name : spec.predictors) {
        const auto values = numeric_column(d, name);
        for (std::size_t i = 0; i < n; ++i) dm.x(i, col) = values[i];
        ++col;
    }
    return dm;
}

std::vector<ColumnStats> summary_stats(const Dataset& d) {
    const std::size_t n = d.records.size();
    if (n == 0) throw DataError("empty dataset");

    std::vector<ColumnStats> stats;
    stats.reserve(numeric_columns.size());
    for (const char* name : numeric_columns) {
        const auto v = numeric_column(d, name);
        ColumnStats cs;
        cs.name = name;
        cs.min = *std::min_element(v.begin(), v.end());
        cs.max = *std::max_element(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v) sum += x;
        cs.mean = sum / static_cast<double>(n);
        if (n > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - cs.mean) * (x - cs.mean);
            cs.sd = std::sqrt(ss / static_cast<double>(n - 1));
        }
        stats.push_back(std::move(cs));
    }
    return stats;
}

} // namespace defpred::dataset
