#ifndef DEFPRED_DATASET_HPP
#define DEFPRED_DATASET_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defpred/model_spec.hpp"
#include "defpred/numerics.hpp"

namespace defpred::dataset {

// One project's upstream metrics and defect counts. Counts and efforts are
// stored as doubles because they feed straight into the design matrix;
// validation still enforces the count-like invariants below.
struct MetricRecord {
    std::string project_id;
    double req_error = 0;
    double design_error = 0;
    double coding_error = 0;
    double kloc = 0;              // thousands of lines of code
    double req_pages = 0;
    double design_pages = 0;
    double total_test_cases = 0;
    double test_case_error = 0;
    double total_effort_days = 0; // person-days in all phases before system testing
    double test_design_effort_days = 0;
    double functional_defects = 0;
    double all_defects = 0;

    bool operator==(const MetricRecord&) const = default;
};

struct Dataset {
    std::vector<MetricRecord> records; // file order preserved
    std::string source;                // provenance (file name or "inline")

    bool operator==(const Dataset&) const = default;
};

// The twelve numeric columns, in schema order (project_id excluded).
inline constexpr std::array<const char*, 12> numeric_columns = {
    "req_error",         "design_error", "coding_error",      "kloc",
    "req_pages",         "design_pages", "total_test_cases",  "test_case_error",
    "total_effort_days", "test_design_effort_days", "functional_defects", "all_defects",
};

// Exact CSV header, in order.
std::string csv_header();

// Area taxonomy of the factor catalog.
enum class FactorArea {
    software_complexity,
    knowledge,
    test_process,
    errors,
    fault,
    defect,
    type_of_software,
};

// One cataloged factor: its area, display name, whether the schema measures
// it, and which MetricRecord columns measure it (empty when unmeasured).
struct FactorEntry {
    FactorArea area;
    std::string factor;
    bool measured = false;
    std::vector<std::string> columns;
};

// Full factor catalog. Every numeric MetricRecord column appears in exactly
// one entry's column list.
const std::vector<FactorEntry>& factor_catalog();

// Validate a single record's invariants: all values finite and >= 0,
// functional_defects <= all_defects, test_design_effort_days <=
// total_effort_days. `row_label` seeds error messages. Throws DataError.
void validate_record(const MetricRecord& r, const std::string& row_label);

// Parse a dataset CSV document (exact header required; see csv_header()).
// Accepts LF or CRLF endings; plain or scientific decimals. Throws
// DataError with row/column location on any malformed cell, duplicate
// project_id, violated invariant, or an empty data section.
Dataset parse_csv(std::string_view text, std::string_view source = "inline");

// Render a dataset back to CSV. Numbers use shortest round-trip formatting,
// so parse_csv(emit_csv(d)) == d for any valid dataset.
std::string emit_csv(const Dataset& d);

// Fetch one numeric column by name. Throws DataError on unknown names.
std::vector<double> numeric_column(const Dataset& d, const std::string& name);

struct DesignMatrix {
    numerics::Matrix x;    // n-by-p, leading ones column when intercept on
    std::vector<double> y; // target column
};

// Assemble the regression design matrix for a spec. Columns appear in spec
// order after the optional intercept column. Throws DataError on unknown
// column names or an empty dataset.
DesignMatrix design_matrix(const Dataset& d, const ModelSpec& spec);

struct ColumnStats {
    std::string name;
    double min = 0;
    double max = 0;
    double mean = 0;
    std::optional<double> sd; // absent when n == 1 (sample sd undefined)
};

// Per-column (min, max, mean, sd) over all numeric columns; sd uses the
// n-1 denominator. Throws DataError on an empty dataset.
std::vector<ColumnStats> summary_stats(const Dataset& d);

} // namespace defpred::dataset

#endif // DEFPRED_DATASET_HPP
