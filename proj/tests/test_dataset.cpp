#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include <doctest.h>

#include "defpred/dataset.hpp"
#include "defpred/errors.hpp"

using namespace defpred;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "fixture not readable: " << path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dataset::Dataset bundled() {
    static const dataset::Dataset d =
        dataset::parse_csv(slurp(std::string(DEFPRED_DATA_DIR) + "/table2.csv"), "table2");
    return d;
}

// A minimal valid document for mutation tests.
const char* small_csv =
    "project_id,req_error,design_error,coding_error,kloc,req_pages,design_pages,"
    "total_test_cases,test_case_error,total_effort_days,test_design_effort_days,"
    "functional_defects,all_defects\n"
    "P1,1,2,3,4.5,6,7,8,9,10.5,10,2,3\n"
    "P2,0,0,1,2,3,4,5,6,7,6.5,1,1\n";

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("bundled dataset parses with expected shape and values") {
    const auto d = bundled();
    CHECK(d.records.size() == 14);
    CHECK(d.source == "table2");

    const auto& a = d.records.front();
    CHECK(a.project_id == "Project A");
    CHECK(a.req_error == 5);
    CHECK(a.design_error == 22);
    CHECK(a.coding_error == 12);
    CHECK(a.kloc == 28.8);
    CHECK(a.req_pages == 81);
    CHECK(a.design_pages == 121);
    CHECK(a.total_test_cases == 224);
    CHECK(a.test_case_error == 34);
    CHECK(a.total_effort_days == 16.79);
    CHECK(a.test_design_effort_days == 15.20);
    CHECK(a.functional_defects == 19);
    CHECK(a.all_defects == 19);

    const auto& r = d.records.back();
    CHECK(r.project_id == "Project R");
    CHECK(r.kloc == 24.2);
    CHECK(r.functional_defects == 20);
    CHECK(r.all_defects == 33);
}

TEST_CASE("csv_header lists the schema in order") {
    CHECK(dataset::csv_header() ==
          "project_id,req_error,design_error,coding_error,kloc,req_pages,"
          "design_pages,total_test_cases,test_case_error,total_effort_days,"
          "test_design_effort_days,functional_defects,all_defects");
}

TEST_CASE("factor catalog covers every numeric column exactly once") {
    const auto& catalog = dataset::factor_catalog();
    CHECK(catalog.size() >= 12);

    std::set<std::string> seen;
    std::set<dataset::FactorArea> areas;
    for (const auto& entry : catalog) {
        areas.insert(entry.area);
        if (!entry.measured) CHECK(entry.columns.empty());
        for (const auto& col : entry.columns) {
            CHECK_MESSAGE(seen.insert(col).second, "column mapped twice: " << col);
        }
    }
    CHECK(seen.size() == dataset::numeric_columns.size());
    for (const auto* col : dataset::numeric_columns) {
        CHECK_MESSAGE(seen.count(col) == 1, "column unmapped: " << col);
    }
    CHECK(areas.size() == 7); // every area represented
}

TEST_CASE("validate_record enforces the invariants") {
    dataset::MetricRecord r;
    r.project_id = "X";
    r.functional_defects = 2;
    r.all_defects = 3;
    r.total_effort_days = 5;
    r.test_design_effort_days = 4;
    CHECK_NOTHROW(dataset::validate_record(r, "row 1"));

    auto bad = r;
    bad.kloc = -0.1;
    CHECK_THROWS_WITH_AS(dataset::validate_record(bad, "row 1"),
                         doctest::Contains("kloc"), DataError);

    bad = r;
    bad.functional_defects = 4; // exceeds all_defects = 3
    CHECK_THROWS_WITH_AS(dataset::validate_record(bad, "row 1"),
                         doctest::Contains("functional_defects"), DataError);

    bad = r;
    bad.test_design_effort_days = 6; // exceeds total_effort_days = 5
    CHECK_THROWS_WITH_AS(dataset::validate_record(bad, "row 1"),
                         doctest::Contains("test_design_effort_days"), DataError);

    bad = r;
    bad.req_pages = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(dataset::validate_record(bad, "row 1"), DataError);
}

TEST_CASE("parse_csv rejects malformed documents with located messages") {
    CHECK_THROWS_WITH_AS(dataset::parse_csv(""), doctest::Contains("header"), DataError);

    // Header typo.
    std::string doc = small_csv;
    const auto pos = doc.find("design_error");
    doc.replace(pos, 12, "design_eror,"); // keep byte count stable-ish
    CHECK_THROWS_AS(dataset::parse_csv(doc), DataError);

    // Non-numeric cell, located by row and column.
    doc = small_csv;
    CHECK_THROWS_WITH_AS(dataset::parse_csv(doc.replace(doc.find("4.5"), 3, "4x5")),
                         doctest::Contains("kloc"), DataError);

    // Wrong cell count.
    doc = std::string(small_csv) + "P3,1,2,3\n";
    CHECK_THROWS_WITH_AS(dataset::parse_csv(doc), doctest::Contains("row 3"), DataError);

    // Duplicate project id.
    doc = small_csv;
    doc.replace(doc.find("P2"), 2, "P1");
    CHECK_THROWS_WITH_AS(dataset::parse_csv(doc), doctest::Contains("duplicate"),
                         DataError);

    // Header only: no data.
    doc = dataset::csv_header() + "\n";
    CHECK_THROWS_WITH_AS(dataset::parse_csv(doc),
                         doctest::Contains("header without data rows"), DataError);

    // Invariant violation caught at parse time (functional > all).
    doc = small_csv;
    doc.replace(doc.find(",2,3\n"), 5, ",4,3\n");
    CHECK_THROWS_AS(dataset::parse_csv(doc), DataError);
}

TEST_CASE("parse_csv accepts CRLF endings") {
    std::string doc = small_csv;
    std::string crlf;
    for (const char c : doc) {
        if (c == '\n') crlf += "\r\n";
        else crlf += c;
    }
    CHECK(dataset::parse_csv(crlf) == dataset::parse_csv(doc));
}

TEST_CASE("emit_csv round-trips exactly") {
    const auto d = bundled();
    const auto emitted = dataset::emit_csv(d);
    auto reparsed = dataset::parse_csv(emitted, d.source);
    CHECK(reparsed == d);

    // Values with no short decimal form survive too.
    auto tweaked = d;
    tweaked.records[0].total_effort_days = 16.79000000000001;
    CHECK(dataset::parse_csv(dataset::emit_csv(tweaked), d.source) == tweaked);
}

TEST_CASE("numeric_column fetches by name and rejects unknowns") {
    const auto d = bundled();
    const auto kloc = dataset::numeric_column(d, "kloc");
    REQUIRE(kloc.size() == 14);
    CHECK(kloc.front() == 28.8);
    CHECK(kloc.back() == 24.2);
    CHECK_THROWS_WITH_AS(dataset::numeric_column(d, "project_id"),
                         doctest::Contains("project_id"), DataError);
    CHECK_THROWS_AS(dataset::numeric_column(d, "nope"), DataError);
}

TEST_CASE("design_matrix assembles intercept plus spec columns") {
    const auto d = bundled();
    const ModelSpec spec{"functional_defects", {"kloc", "req_pages"}, true};
    const auto dm = dataset::design_matrix(d, spec);
    REQUIRE(dm.x.rows() == 14);
    REQUIRE(dm.x.cols() == 3);
    for (std::size_t i = 0; i < 14; ++i) CHECK(dm.x(i, 0) == 1.0);
    CHECK(dm.x(0, 1) == 28.8);
    CHECK(dm.x(0, 2) == 81);
    CHECK(dm.y.front() == 19);
    CHECK(dm.y.back() == 20);

    const ModelSpec bare{"all_defects", {"kloc"}, false};
    const auto dm2 = dataset::design_matrix(d, bare);
    CHECK(dm2.x.cols() == 1);
    CHECK(dm2.x(0, 0) == 28.8);

    CHECK_THROWS_AS(dataset::design_matrix(d, ModelSpec{"nope", {"kloc"}, true}),
                    DataError);
    CHECK_THROWS_AS(
        dataset::design_matrix(dataset::Dataset{}, ModelSpec{"kloc", {"req_error"}, true}),
        DataError);
}

TEST_CASE("summary_stats reports min/max/mean/sd per column") {
    const auto stats = dataset::summary_stats(bundled());
    REQUIRE(stats.size() == 12);
    const auto kloc = std::find_if(stats.begin(), stats.end(),
                                   [](const auto& s) { return s.name == "kloc"; });
    REQUIRE(kloc != stats.end());
    CHECK(kloc->min == 0.2);
    CHECK(kloc->max == 36);
    CHECK(kloc->mean == doctest::Approx(11.292857142857141).epsilon(1e-12));
    REQUIRE(kloc->sd.has_value());
    CHECK(*kloc->sd == doctest::Approx(12.136750565357858).epsilon(1e-12));

    // Single-record dataset: sample sd undefined.
    dataset::Dataset one;
    one.records.push_back(bundled().records.front());
    const auto stats1 = dataset::summary_stats(one);
    CHECK_FALSE(stats1.front().sd.has_value());

    CHECK_THROWS_AS(dataset::summary_stats(dataset::Dataset{}), DataError);
}

} // TEST_SUITE
