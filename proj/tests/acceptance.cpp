// Acceptance harness. Each criterion prints exactly one line:
//
//   CRITERION <n> (<name>): PASS|FAIL — <detail>
//
// Run with no arguments to evaluate all eight criteria, or pass criterion
// numbers (e.g. "acceptance 2 5") to evaluate a subset. Exits 0 iff every
// requested criterion passes.
//
// Criterion 3 asserts the published four-round gate claim. On the bundled
// dataset it does not hold (round 4's req_error p-value is 0.0537 under a
// two-sided test), so this harness reports an honest FAIL there rather than
// bending the gate; the detail line carries the analysis.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "defpred/baselines.hpp"
#include "defpred/dataset.hpp"
#include "defpred/diagnostics.hpp"
#include "defpred/errors.hpp"
#include "defpred/gate.hpp"
#include "defpred/numerics.hpp"
#include "defpred/regress.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace defpred;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() /
                 ("defpred_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct CliRun {
    int exit_code = -1;
    std::string out;
    double seconds = 0.0;
};

CliRun run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("cli_out" + std::to_string(counter++));
    const std::string cmd = std::string("\"") + DEFPRED_CLI_PATH + "\" " + args +
                            " > \"" + out.string() + "\" 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const auto t1 = std::chrono::steady_clock::now();
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    return r;
}

const dataset::Dataset& bundled() {
    static const dataset::Dataset d = dataset::parse_csv(
        slurp(fs::path(DEFPRED_DATA_DIR) / "table2.csv"), "table2");
    return d;
}

ModelSpec round1_spec() { return gate::enumerate_rounds()[0].spec(); }

const regress::FittedModel& round1_model() {
    static const regress::FittedModel m = regress::fit(bundled(), round1_spec());
    return m;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// --- criterion 1: published-equation reproduction through the CLI ----------

Outcome criterion_equation() {
    const fs::path out = scratch_dir() / "rounds";
    const auto run = run_cli("rounds --data \"" +
                             (fs::path(DEFPRED_DATA_DIR) / "table2.csv").string() +
                             "\" --out \"" + out.string() + "\"");
    if (run.exit_code != 0) {
        return {false, "rounds command exited " + std::to_string(run.exit_code)};
    }
    const auto m = regress::load_model(slurp(out / "round1.json"));

    // Published coefficients and one unit of each value's last printed digit.
    const std::vector<double> published = {4.00,  -0.204, -0.631, 1.90,
                                           -0.140, 0.125, -0.169, 0.221};
    const std::vector<double> tolerance = {0.01,  0.001, 0.001, 0.01,
                                           0.001, 0.001, 0.001, 0.001};
    double worst_ratio = 0.0;
    std::size_t worst = 0;
    for (std::size_t j = 0; j < 8; ++j) {
        const double dev = std::fabs(m.coefficients[j] - published[j]);
        if (dev / tolerance[j] > worst_ratio) {
            worst_ratio = dev / tolerance[j];
            worst = j;
        }
        if (dev > tolerance[j]) {
            return {false, "coefficient '" + m.term_names[j] + "' = " +
                               fmt("%.6f", m.coefficients[j]) + " misses " +
                               fmt("%.3f", published[j]) + " by more than " +
                               fmt("%g", tolerance[j])};
        }
    }
    if (run.seconds >= 1.0) {
        return {false, "rounds run took " + fmt("%.2f", run.seconds) + "s (limit 1s)"};
    }
    return {true, "all 8 coefficients within print tolerance (tightest margin: " +
                      m.term_names[worst] + " at " + fmt("%.0f", worst_ratio * 100) +
                      "% of tolerance); rounds ran in " +
                      fmt("%.0f", run.seconds * 1000) + "ms"};
}

// --- criterion 2: QR path vs extended-precision normal equations -----------

Outcome criterion_oracle() {
    std::mt19937_64 rng(424242u);
    std::uniform_real_distribution<double> entry(0.0, 20.0);
    std::uniform_real_distribution<double> defects(0.0, 50.0);
    std::uniform_int_distribution<int> extra_rows(3, 14);
    const std::vector<std::string> pool = {"req_error", "coding_error", "kloc",
                                           "req_pages", "design_pages"};

    double worst = 0.0;
    const int instances = 100;
    for (int trial = 0; trial < instances; ++trial) {
        const std::size_t p = 2 + static_cast<std::size_t>(trial % 5); // 2..6 terms
        const std::size_t n_preds = p - 1;
        const std::size_t n =
            std::min<std::size_t>(20, p + static_cast<std::size_t>(extra_rows(rng)));

        dataset::Dataset ds;
        ds.source = "synthetic";
        for (std::size_t i = 0; i < n; ++i) {
            dataset::MetricRecord r;
            r.project_id = "S" + std::to_string(i);
            r.req_error = entry(rng);
            r.coding_error = entry(rng);
            r.kloc = entry(rng);
            r.req_pages = entry(rng);
            r.design_pages = entry(rng);
            r.functional_defects = defects(rng);
            r.all_defects = r.functional_defects + 1.0;
            r.total_effort_days = 10.0;
            r.test_design_effort_days = 5.0;
            ds.records.push_back(r);
        }
        const ModelSpec spec{"functional_defects",
                             {pool.begin(), pool.begin() + static_cast<long>(n_preds)},
                             true};
        const auto m = regress::fit(ds, spec);
        const auto dm = dataset::design_matrix(ds, spec);
        const auto ref = oracle::ne_fit(dm.x, dm.y, true);

        const auto track = [&worst](double got, long double want) {
            const double dev = std::fabs(got - static_cast<double>(want)) /
                               std::max(1.0, std::fabs(static_cast<double>(want)));
            worst = std::max(worst, dev);
            return dev <= 1e-8;
        };
        for (std::size_t j = 0; j < p; ++j) {
            if (!track(m.coefficients[j], ref.beta[j])) {
                return {false, "trial " + std::to_string(trial) + ": coefficient " +
                                   std::to_string(j) + " deviates by " +
                                   fmt("%.3g", worst)};
            }
            if (!track(m.std_errors[j], ref.se[j])) {
                return {false, "trial " + std::to_string(trial) + ": std error " +
                                   std::to_string(j) + " deviates by " +
                                   fmt("%.3g", worst)};
            }
        }
        if (!track(m.r_squared, ref.r2)) {
            return {false, "trial " + std::to_string(trial) + ": R^2 deviates by " +
                               fmt("%.3g", worst)};
        }

        // Interval bounds at the first record's predictor values.
        std::vector<double> x0;
        std::vector<long double> x0_design = {1.0L};
        for (const auto& name : spec.predictors) {
            const double v = dataset::numeric_column(ds, name)[0];
            x0.push_back(v);
            x0_design.push_back(v);
        }
        const auto pred = regress::predict(m, x0, 0.95);
        const auto ref_iv = oracle::intervals_at(ref, x0_design, 0.95, n);
        if (!track(pred.pi_low, ref_iv.pi_low) || !track(pred.pi_high, ref_iv.pi_high) ||
            !track(pred.ci_low, ref_iv.ci_low) || !track(pred.ci_high, ref_iv.ci_high)) {
            return {false,
                    "trial " + std::to_string(trial) + ": interval bound deviates by " +
                        fmt("%.3g", worst)};
        }
    }
    return {true, std::to_string(instances) +
                      " random instances agree with the long-double normal-equations "
                      "oracle; worst relative deviation " +
                      fmt("%.2g", worst)};
}

// --- criterion 3: the four-round gate claim ---------------------------------

Outcome criterion_gate() {
    const auto results = gate::run_rounds(bundled(), gate::GateCriteria{});
    std::vector<int> passed, failed;
    for (const auto& r : results) {
        (r.report.pass ? passed : failed).push_back(r.config.id);
    }
    if (failed.empty()) {
        return {true, "all four rounds pass the default gate (p < 0.05, R^2 > 0.85, "
                      "adj R^2 > 0.85)"};
    }
    std::string detail = "rounds";
    for (const int id : passed) detail += " " + std::to_string(id);
    detail += " pass, but";
    for (const auto& r : results) {
        if (r.report.pass) continue;
        detail += " round " + std::to_string(r.config.id) + " (" + r.config.target +
                  " on " + r.config.effort_predictor + ") fails:";
        for (const auto& name : r.report.failures) {
            const auto item = std::find_if(
                r.report.items.begin(), r.report.items.end(),
                [&](const auto& i) { return i.criterion == name; });
            detail += " " + name + " = " + fmt("%.6f", item->value) + " vs " +
                      fmt("%g", item->threshold);
        }
    }
    detail += "; the round-4 req_error two-sided p-value genuinely exceeds 0.05 "
              "(t = -2.395 on 6 df needs |t| > 2.447), so the all-rounds claim "
              "does not hold on this dataset";
    return {false, detail};
}

// --- criterion 4: t-distribution accuracy -----------------------------------

Outcome criterion_distribution() {
    const std::vector<std::pair<double, double>> table = {
        {1.0, 12.706}, {6.0, 2.447}, {10.0, 2.228}};
    for (const auto& [df, want] : table) {
        const double got = numerics::t_quantile(0.975, df);
        if (std::fabs(got - want) > 1e-3) {
            return {false, "t_quantile(0.975, " + fmt("%g", df) + ") = " +
                               fmt("%.6f", got) + " vs table " + fmt("%.3f", want)};
        }
    }
    double worst = 0.0;
    for (int df = 1; df <= 120; ++df) {
        for (const double p : {0.005, 0.025, 0.05, 0.1, 0.25, 0.5,
                               0.75, 0.9, 0.95, 0.975, 0.995}) {
            const double x = numerics::t_quantile(p, df);
            const double dev = std::fabs(numerics::t_cdf(x, df) - p);
            worst = std::max(worst, dev);
            if (dev > 1e-9) {
                return {false, "inverse identity breaks at df=" + std::to_string(df) +
                                   ", p=" + fmt("%g", p) + ": |cdf(quantile)-p| = " +
                                   fmt("%.3g", dev)};
            }
        }
    }
    return {true, "table values matched within 1e-3; inverse identity holds to " +
                      fmt("%.2g", worst) + " across df 1..120"};
}

// --- criterion 5: Monte Carlo prediction-interval coverage ------------------

Outcome criterion_coverage() {
    const auto t0 = std::chrono::steady_clock::now();

    const auto dm = dataset::design_matrix(bundled(), round1_spec());
    const std::size_t n = dm.x.rows(), p = dm.x.cols();
    const auto& truth = round1_model().coefficients;
    const double sigma = 2.0;

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) mean[i] += truth[j] * dm.x(i, j);
    }
    // Held-out point: the first project's predictor profile.
    std::vector<double> x0;
    for (std::size_t j = 1; j < p; ++j) x0.push_back(dm.x(0, j));
    double mean0 = mean[0];

    std::mt19937_64 rng(777777u);
    std::normal_distribution<double> noise(0.0, sigma);

    const int trials = 10000;
    int covered = 0;
    std::vector<double> y(n);
    for (int t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < n; ++i) y[i] = mean[i] + noise(rng);
        const auto sol = numerics::qr_least_squares(dm.x, y);

        regress::FittedModel m;
        m.spec = round1_spec();
        m.n = n;
        m.p = p;
        m.term_names = round1_model().term_names;
        m.coefficients = sol.beta;
        m.s = std::sqrt(sol.sse / static_cast<double>(n - p));
        m.sse = sol.sse;
        m.sst = 1.0; // irrelevant to intervals
        m.xtx_inv = numerics::xtx_inverse(sol.qr);

        const auto pred = regress::predict(m, x0, 0.95);
        const double y_new = mean0 + noise(rng);
        if (y_new >= pred.pi_low && y_new <= pred.pi_high) ++covered;
    }
    const double coverage = static_cast<double>(covered) / trials;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (seconds >= 30.0) {
        return {false, "simulation took " + fmt("%.1f", seconds) + "s (limit 30s)"};
    }
    if (coverage < 0.93 || coverage > 0.97) {
        return {false, "empirical 95%-PI coverage " + fmt("%.4f", coverage) +
                           " outside [0.93, 0.97] over 10000 trials"};
    }
    return {true, "empirical 95%-PI coverage " + fmt("%.4f", coverage) +
                      " over 10000 trials (n=14, p=8 shape) in " +
                      fmt("%.1f", seconds) + "s"};
}

// --- criterion 6: verification harness fidelity ------------------------------

Outcome criterion_verify() {
    const auto run = run_cli("verify --cases \"" +
                             (fs::path(DEFPRED_DATA_DIR) / "table3.csv").string() + "\"");
    if (run.exit_code != 0) {
        return {false, "verify command exited " + std::to_string(run.exit_code)};
    }
    if (run.out.find("predicted_in_pi 10/12") == std::string::npos ||
        run.out.find("actual_in_pi 9/12") == std::string::npos) {
        return {false, "verify output does not show the 10/12 predicted, 9/12 actual "
                       "containment pattern"};
    }

    const auto cases =
        gate::parse_cases_csv(slurp(fs::path(DEFPRED_DATA_DIR) / "table3.csv"));
    const auto outcome = gate::verify_cases(cases);
    bool anomaly_flagged = false;
    for (const auto& c : outcome.cases) {
        if (c.item.label == "functional_test_design/Project 1") {
            anomaly_flagged = !c.predicted_in_pi && !c.actual_in_pi;
        }
    }
    if (!anomaly_flagged) {
        return {false, "the anomalous functional/test-design Project 1 row "
                       "(prediction 183 outside its own interval [201, 392]) was "
                       "not flagged"};
    }

    const auto candidates = gate::candidates_from_cases(cases);
    const auto order = gate::rank_candidates(candidates);
    if (candidates[order[0]].name != "functional_total_effort") {
        return {false, "top-ranked candidate is '" + candidates[order[0]].name +
                           "', expected 'functional_total_effort'"};
    }
    return {true, "containment pattern 10/12 predicted, 9/12 actual reproduced; "
                  "anomalous row flagged; functional_total_effort ranked first"};
}

// --- criterion 7: baseline arithmetic ----------------------------------------

Outcome criterion_baselines() {
    const double linear_1000 =
        baselines::baseline_predict(baselines::linear_loc_model(), 1000.0);
    if (linear_1000 != 22.86) {
        return {false, "linear model at 1000 = " + fmt("%.17g", linear_1000) +
                           ", expected exactly 22.86"};
    }
    const double power_0 = baselines::baseline_predict(baselines::power_loc_model(), 0.0);
    if (power_0 != 4.2) {
        return {false,
                "power model at 0 = " + fmt("%.17g", power_0) + ", expected exactly 4.2"};
    }
    return {true, "linear(1000) = 22.86 and power(0) = 4.2, both bit-exact"};
}

// --- criterion 8: invariant property suite -----------------------------------

Outcome criterion_invariants() {
    const auto& m = round1_model();
    const auto dm = dataset::design_matrix(bundled(), round1_spec());

    // Residual orthogonality: X^T r = 0.
    for (std::size_t j = 0; j < m.p; ++j) {
        double dot = 0, scale = 0;
        for (std::size_t i = 0; i < m.n; ++i) {
            dot += dm.x(i, j) * m.residuals[i];
            scale += std::fabs(dm.x(i, j));
        }
        if (std::fabs(dot) > 1e-8 * std::max(1.0, scale)) {
            return {false, "residuals not orthogonal to design column " +
                               std::to_string(j) + " (dot = " + fmt("%.3g", dot) + ")"};
        }
    }

    // Nested-model R^2 monotonicity.
    const auto preds = round1_spec().predictors;
    double last_r2 = -1.0;
    for (std::size_t k = 1; k <= preds.size(); ++k) {
        const ModelSpec spec{"functional_defects",
                             {preds.begin(), preds.begin() + static_cast<long>(k)},
                             true};
        const double r2 = regress::fit(bundled(), spec).r_squared;
        if (r2 < last_r2 - 1e-12) {
            return {false, "R^2 dropped from " + fmt("%.12f", last_r2) + " to " +
                               fmt("%.12f", r2) + " when adding predictor " +
                               std::to_string(k)};
        }
        last_r2 = r2;
    }

    // Predictor scaling invariance.
    auto scaled = bundled();
    for (auto& r : scaled.records) r.kloc *= 1000.0;
    const auto alt = regress::fit(scaled, round1_spec());
    for (std::size_t j = 0; j < m.p; ++j) {
        const double expect = m.term_names[j] == "kloc" ? m.coefficients[j] / 1000.0
                                                        : m.coefficients[j];
        if (std::fabs(alt.coefficients[j] - expect) >
            1e-8 * std::max(1.0, std::fabs(expect))) {
            return {false, "coefficient '" + m.term_names[j] +
                               "' not scale-invariant under kloc x1000"};
        }
        if (std::fabs(alt.p_values[j] - m.p_values[j]) > 1e-10) {
            return {false,
                    "p-value '" + m.term_names[j] + "' changed under predictor scaling"};
        }
    }

    // Prediction intervals contain confidence intervals.
    for (const auto& rec : bundled().records) {
        const std::vector<double> x0 = {rec.req_error,        rec.coding_error,
                                        rec.kloc,             rec.req_pages,
                                        rec.design_pages,     rec.total_test_cases,
                                        rec.total_effort_days};
        for (const double level : {0.5, 0.85, 0.95, 0.99}) {
            const auto pred = regress::predict(m, x0, level);
            if (pred.pi_low > pred.ci_low || pred.ci_high > pred.pi_high) {
                return {false, "PI does not contain CI for project '" + rec.project_id +
                                   "' at level " + fmt("%g", level)};
            }
        }
    }

    // Determinism: bitwise-equal refits, byte-identical documents and renders.
    const auto refit = regress::fit(bundled(), round1_spec());
    if (refit.coefficients != m.coefficients || refit.p_values != m.p_values) {
        return {false, "refit on identical input is not bitwise identical"};
    }
    if (regress::serialize_model(m) != regress::serialize_model(refit)) {
        return {false, "model document bytes differ across reruns"};
    }
    const auto diag = diagnostics::compute_diagnostics(m);
    const auto svg_a = diagnostics::render_plots(diag, diagnostics::RenderFormat::svg);
    const auto svg_b = diagnostics::render_plots(diag, diagnostics::RenderFormat::svg);
    if (svg_a[0].content != svg_b[0].content) {
        return {false, "diagnostic render bytes differ across reruns"};
    }

    return {true, "orthogonality, nested-R^2 monotonicity, scaling invariance, "
                  "PI superset of CI, and byte-level determinism all hold"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "published-equation reproduction", criterion_equation},
        {2, "oracle equivalence", criterion_oracle},
        {3, "gate reproduction", criterion_gate},
        {4, "distribution accuracy", criterion_distribution},
        {5, "PI coverage property", criterion_coverage},
        {6, "verification harness fidelity", criterion_verify},
        {7, "baseline arithmetic", criterion_baselines},
        {8, "invariant suites", criterion_invariants},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> requested;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "all") {
            requested.clear();
            break;
        }
        char* end = nullptr;
        const long v = std::strtol(argv[i], &end, 10);
        if (end == argv[i] || *end != '\0' || v < 1 || v > 8) {
            std::fprintf(stderr, "usage: %s [criterion 1..8 | all]...\n", argv[0]);
            return 2;
        }
        requested.push_back(static_cast<int>(v));
    }

    bool all_pass = true;
    for (const auto& c : criteria()) {
        if (!requested.empty() &&
            std::find(requested.begin(), requested.end(), c.id) == requested.end()) {
            continue;
        }
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unexpected exception: ") + e.what()};
        }
        std::printf("CRITERION %d (%s): %s — %s\n", c.id, c.name,
                    outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
