// defpred: fit, gate, apply, and verify defect-prediction regression models
// over upstream software metrics.
//
// Exit codes: 0 success, 2 input/usage error, 3 numerical/fit error,
// 4 no round passed the gate under --strict.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../src/csv_util.hpp"
#include "defpred/baselines.hpp"
#include "defpred/dataset.hpp"
#include "defpred/diagnostics.hpp"
#include "defpred/errors.hpp"
#include "defpred/gate.hpp"
#include "defpred/regress.hpp"

namespace {

namespace fs = std::filesystem;
using namespace defpred;

// Thrown by command bodies that must terminate with a specific exit code.
struct ExitWith {
    int code;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

// ---- formatting helpers (snprintf-based: deterministic, locale-free) -------

std::string g6(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string f6(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string pct2(double fraction) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

// Shortest decimal that parses back to the same double (file outputs).
std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// ---- shared pieces ----------------------------------------------------------

dataset::Dataset load_dataset(const std::string& path) {
    return dataset::parse_csv(read_file(path), path);
}

regress::FittedModel load_model_file(const std::string& path) {
    return regress::load_model(read_file(path));
}

void print_fit_summary(const regress::FittedModel& m) {
    std::string formula = m.spec.target + " ~ ";
    for (std::size_t i = 0; i < m.spec.predictors.size(); ++i) {
        if (i) formula += " + ";
        formula += m.spec.predictors[i];
    }
    if (!m.spec.include_intercept) formula += "  (no intercept)";
    std::printf("Regression: %s\n", formula.c_str());
    std::printf("n = %zu, p = %zu, df = %zu\n\n", m.n, m.p, m.n - m.p);

    std::size_t name_w = std::string("Predictor").size();
    for (const auto& t : m.term_names) name_w = std::max(name_w, t.size());

    std::printf("%s %s %s %s %s\n", pad_right("Predictor", name_w).c_str(),
                pad_left("Coef", 12).c_str(), pad_left("SE Coef", 12).c_str(),
                pad_left("T", 10).c_str(), pad_left("P", 10).c_str());
    for (std::size_t j = 0; j < m.p; ++j) {
        std::printf("%s %s %s %s %s\n", pad_right(m.term_names[j], name_w).c_str(),
                    pad_left(g6(m.coefficients[j]), 12).c_str(),
                    pad_left(g6(m.std_errors[j]), 12).c_str(),
                    pad_left(g6(m.t_stats[j]), 10).c_str(),
                    pad_left(f6(m.p_values[j]), 10).c_str());
    }
    std::printf("\nS = %s   R-Sq = %s   R-Sq(adj) = %s\n", g6(m.s).c_str(),
                pct2(m.r_squared).c_str(), pct2(m.adj_r_squared).c_str());
    if (std::isnan(m.f_stat)) {
        if (m.degenerate_perfect_fit) {
            std::printf("F = undefined (perfect fit)\n");
        } else {
            std::printf("F = undefined (no regression degrees of freedom)\n");
        }
    } else {
        std::printf("F = %s   P(F) = %s\n", g6(m.f_stat).c_str(),
                    f6(m.f_p_value).c_str());
    }
    if (m.degenerate_perfect_fit) {
        std::printf("note: degenerate perfect fit — zero residual variance, "
                    "p-values reported as 0\n");
    }
}

gate::GateCriteria parse_gate_option(const std::string& text, bool gate_intercept) {
    gate::GateCriteria c;
    c.gate_intercept = gate_intercept;
    if (text.empty()) {
        gate::validate_criteria(c);
        return c;
    }
    for (const auto token : csv::split_fields(text)) {
        const std::size_t eq = token.find('=');
        if (eq == std::string_view::npos) {
            throw DataError("bad gate token '" + std::string(token) +
                            "' (expected key=value)");
        }
        const std::string_view key = token.substr(0, eq);
        double value = 0.0;
        if (!csv::parse_number(token.substr(eq + 1), value)) {
            throw DataError("bad gate value in '" + std::string(token) + "'");
        }
        if (key == "p") {
            c.p_max = value;
        } else if (key == "r2") {
            c.r2_min = value;
        } else if (key == "adj") {
            c.adj_r2_min = value;
        } else {
            throw DataError("unknown gate key '" + std::string(key) +
                            "' (expected p, r2 or adj)");
        }
    }
    gate::validate_criteria(c);
    return c;
}

// ---- subcommands ------------------------------------------------------------

struct FitConfig {
    std::string data;
    std::string target;
    std::vector<std::string> predictors;
    bool no_intercept = false;
    std::string out;
};

void run_fit(const FitConfig& cfg) {
    const auto ds = load_dataset(cfg.data);
    const ModelSpec spec{cfg.target, cfg.predictors, !cfg.no_intercept};
    const auto m = regress::fit(ds, spec);
    print_fit_summary(m);
    if (!cfg.out.empty()) {
        write_file(cfg.out, regress::serialize_model(m));
        std::printf("\nmodel written: %s\n", cfg.out.c_str());
    }
}

struct RoundsConfig {
    std::string data;
    std::string gate_spec;
    bool gate_intercept = false;
    std::string out;
    bool strict = false;
};

void run_rounds(const RoundsConfig& cfg) {
    const auto ds = load_dataset(cfg.data);
    const auto criteria = parse_gate_option(cfg.gate_spec, cfg.gate_intercept);
    const auto results = gate::run_rounds(ds, criteria);

    fs::create_directories(cfg.out);
    for (const auto& r : results) {
        const fs::path path =
            fs::path(cfg.out) / ("round" + std::to_string(r.config.id) + ".json");
        write_file(path, regress::serialize_model(r.model));
    }

    std::printf("gate: p < %s, R-Sq > %s, R-Sq(adj) > %s%s\n\n",
                g6(criteria.p_max).c_str(), pct2(criteria.r2_min).c_str(),
                pct2(criteria.adj_r2_min).c_str(),
                criteria.gate_intercept ? ", intercept gated" : "");
    std::printf("round  %s %s %s %s %s  verdict\n",
                pad_right("target", 19).c_str(), pad_right("effort", 24).c_str(),
                pad_left("R-Sq", 8).c_str(), pad_left("R-Sq(adj)", 10).c_str(),
                pad_left("max p", 10).c_str());
    bool any_pass = false;
    for (const auto& r : results) {
        double max_p = 0.0;
        for (const auto& item : r.report.items) {
            if (item.gated && item.criterion.rfind("p-value[", 0) == 0) {
                max_p = std::max(max_p, item.value);
            }
        }
        std::string verdict = "PASS";
        if (!r.report.pass) {
            verdict = "FAIL: ";
            for (std::size_t i = 0; i < r.report.failures.size(); ++i) {
                if (i) verdict += ", ";
                verdict += r.report.failures[i];
            }
        }
        any_pass = any_pass || r.report.pass;
        std::printf("%5d  %s %s %s %s %s  %s\n", r.config.id,
                    pad_right(r.config.target, 19).c_str(),
                    pad_right(r.config.effort_predictor, 24).c_str(),
                    pad_left(pct2(r.model.r_squared), 8).c_str(),
                    pad_left(pct2(r.model.adj_r_squared), 10).c_str(),
                    pad_left(f6(max_p), 10).c_str(), verdict.c_str());
    }
    std::printf("\nmodels written: %s/round1.json .. round4.json\n", cfg.out.c_str());
    if (cfg.strict && !any_pass) {
        std::fprintf(stderr, "error: no round passes the gate\n");
        throw ExitWith{4};
    }
}

struct PredictConfig {
    std::string model;
    std::string input;
    double level = regress::default_level;
    std::string format = "table";
};

// The prediction input only has to supply the model's predictor columns (plus
// an optional project_id for labeling), so it is read leniently by header
// name rather than through the strict dataset schema.
void run_predict(const PredictConfig& cfg) {
    const auto m = load_model_file(cfg.model);

    const std::string text = read_file(cfg.input);
    const auto lines = csv::split_lines(text);
    if (lines.empty()) throw DataError("empty document: missing header row");
    const auto header = csv::split_fields(lines[0]);

    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col_index.emplace(std::string(header[i]), i);
    }
    for (const auto& name : m.spec.predictors) {
        if (!col_index.count(name)) {
            throw DataError("missing predictor column '" + name + "' in " + cfg.input);
        }
    }
    const bool has_id = col_index.count("project_id") > 0;

    struct Row {
        std::string label;
        regress::PredictionResult pred;
    };
    std::vector<Row> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string row_label = "row " + std::to_string(li);
        if (lines[li].empty()) throw DataError(row_label + ": blank line");
        const auto cells = csv::split_fields(lines[li]);
        if (cells.size() != header.size()) {
            throw DataError(row_label + ": expected " + std::to_string(header.size()) +
                            " cells, found " + std::to_string(cells.size()));
        }
        std::map<std::string, double> values;
        for (const auto& name : m.spec.predictors) {
            double v = 0.0;
            if (!csv::parse_number(cells[col_index[name]], v)) {
                throw DataError(row_label + ", column '" + name +
                                "': non-numeric cell '" +
                                std::string(cells[col_index[name]]) + "'");
            }
            values[name] = v;
        }
        Row row;
        row.label = has_id ? std::string(cells[col_index["project_id"]])
                           : "#" + std::to_string(li);
        row.pred = regress::predict(m, values, cfg.level);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty input: header without data rows");

    if (cfg.format == "csv") {
        std::printf("project_id,point,point_rounded,pi_low,pi_high,ci_low,ci_high\n");
        for (const auto& r : rows) {
            std::printf("%s,%s,%lld,%s,%s,%s,%s\n", r.label.c_str(),
                        shortest(r.pred.point).c_str(), r.pred.point_rounded,
                        shortest(r.pred.display_pi_low()).c_str(),
                        shortest(r.pred.pi_high).c_str(),
                        shortest(r.pred.ci_low).c_str(),
                        shortest(r.pred.ci_high).c_str());
        }
        return;
    }
    std::size_t label_w = std::string("project_id").size();
    for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
    std::printf("level: %s\n", g6(cfg.level).c_str());
    std::printf("%s %s %s %s %s %s %s\n", pad_right("project_id", label_w).c_str(),
                pad_left("point", 12).c_str(), pad_left("rounded", 8).c_str(),
                pad_left("pi_low", 12).c_str(), pad_left("pi_high", 12).c_str(),
                pad_left("ci_low", 12).c_str(), pad_left("ci_high", 12).c_str());
    for (const auto& r : rows) {
        std::printf("%s %s %s %s %s %s %s\n", pad_right(r.label, label_w).c_str(),
                    pad_left(g6(r.pred.point), 12).c_str(),
                    pad_left(std::to_string(r.pred.point_rounded), 8).c_str(),
                    pad_left(g6(r.pred.display_pi_low()), 12).c_str(),
                    pad_left(g6(r.pred.pi_high), 12).c_str(),
                    pad_left(g6(r.pred.ci_low), 12).c_str(),
                    pad_left(g6(r.pred.ci_high), 12).c_str());
    }
}

struct VerifyConfig {
    std::string cases;
};

void run_verify(const VerifyConfig& cfg) {
    const auto cases = gate::parse_cases_csv(read_file(cfg.cases));
    const auto outcome = gate::verify_cases(cases);

    std::size_t label_w = std::string("case").size();
    for (const auto& c : outcome.cases) label_w = std::max(label_w, c.item.label.size());
    std::printf("%s %s %s %s %s %s %s %s\n", pad_right("case", label_w).c_str(),
                pad_left("predicted", 10).c_str(), pad_left("actual", 8).c_str(),
                pad_left("pi_low", 9).c_str(), pad_left("pi_high", 9).c_str(),
                pad_left("pred_in", 8).c_str(), pad_left("act_in", 7).c_str(),
                pad_left("rel_width", 10).c_str());
    std::size_t pred_in = 0, act_in = 0;
    for (const auto& c : outcome.cases) {
        pred_in += c.predicted_in_pi ? 1 : 0;
        act_in += c.actual_in_pi ? 1 : 0;
        std::printf("%s %s %s %s %s %s %s %s\n", pad_right(c.item.label, label_w).c_str(),
                    pad_left(g6(c.item.predicted), 10).c_str(),
                    pad_left(g6(c.item.actual), 8).c_str(),
                    pad_left(g6(c.item.pi_low), 9).c_str(),
                    pad_left(g6(c.item.pi_high), 9).c_str(),
                    pad_left(c.predicted_in_pi ? "yes" : "no", 8).c_str(),
                    pad_left(c.actual_in_pi ? "yes" : "no", 7).c_str(),
                    pad_left(f6(c.relative_width), 10).c_str());
    }
    std::printf("\nsummary: %zu cases, predicted_in_pi %zu/%zu, actual_in_pi %zu/%zu, "
                "mean relative width %s\n",
                outcome.cases.size(), pred_in, outcome.cases.size(), act_in,
                outcome.cases.size(), f6(outcome.mean_relative_width).c_str());

    const auto candidates = gate::candidates_from_cases(cases);
    const auto order = gate::rank_candidates(candidates);
    std::size_t cand_w = std::string("candidate").size();
    for (const auto& c : candidates) cand_w = std::max(cand_w, c.name.size());
    std::printf("\ncandidates (all-predicted-in-PI tier first, then ascending mean "
                "relative PI width):\n");
    std::printf("rank  %s %s %s %s\n", pad_right("candidate", cand_w).c_str(),
                pad_left("pred_in", 8).c_str(), pad_left("act_in", 7).c_str(),
                pad_left("mean_rel_width", 15).c_str());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& c = candidates[order[rank]];
        std::size_t cp = 0, ca = 0;
        for (const auto& cr : c.outcome.cases) {
            cp += cr.predicted_in_pi ? 1 : 0;
            ca += cr.actual_in_pi ? 1 : 0;
        }
        const std::string frac_p =
            std::to_string(cp) + "/" + std::to_string(c.outcome.cases.size());
        const std::string frac_a =
            std::to_string(ca) + "/" + std::to_string(c.outcome.cases.size());
        std::printf("%4zu  %s %s %s %s\n", rank + 1, pad_right(c.name, cand_w).c_str(),
                    pad_left(frac_p, 8).c_str(), pad_left(frac_a, 7).c_str(),
                    pad_left(f6(c.outcome.mean_relative_width), 15).c_str());
    }
}

struct DiagnoseConfig {
    std::string model;
    std::string data;
    std::string out;
    std::string format = "csv,svg";
};

void run_diagnose(const DiagnoseConfig& cfg) {
    auto m = load_model_file(cfg.model);
    const auto ds = load_dataset(cfg.data);
    const auto applied = regress::apply_to(m, ds);
    m.fitted = applied.fitted;
    m.residuals = applied.residuals;
    const auto diag = diagnostics::compute_diagnostics(m);

    std::vector<diagnostics::RenderFormat> formats;
    for (const auto token : csv::split_fields(cfg.format)) {
        diagnostics::RenderFormat f;
        if (token == "csv") {
            f = diagnostics::RenderFormat::csv;
        } else if (token == "svg") {
            f = diagnostics::RenderFormat::svg;
        } else {
            throw DataError("unsupported format token '" + std::string(token) +
                            "' (expected csv or svg)");
        }
        if (std::find(formats.begin(), formats.end(), f) == formats.end()) {
            formats.push_back(f);
        }
    }

    fs::create_directories(cfg.out);
    for (const auto format : formats) {
        for (const auto& view : diagnostics::render_plots(diag, format)) {
            const fs::path path = fs::path(cfg.out) / view.filename;
            write_file(path, view.content);
            std::printf("wrote %s\n", path.string().c_str());
        }
    }
}

struct BaselineConfig {
    double loc = 0.0;
    std::string unit = "loc";
};

void run_baseline(const BaselineConfig& cfg) {
    if (!std::isfinite(cfg.loc) || cfg.loc < 0.0) {
        throw DataError("--loc must be a non-negative finite value");
    }
    const double loc = cfg.unit == "kloc" ? cfg.loc * 1000.0 : cfg.loc;
    const auto linear = baselines::linear_loc_model();
    const auto power = baselines::power_loc_model();
    std::printf("size: %s lines of code\n", shortest(loc).c_str());
    std::printf("linear_loc (4.86 + 0.018*LOC):        %s\n",
                g6(baselines::baseline_predict(linear, loc)).c_str());
    std::printf("power_loc  (4.2 + 0.0015*LOC^(4/3)):  %s\n",
                g6(baselines::baseline_predict(power, loc)).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"defect-prediction regression toolkit: rebuild, gate, apply and "
                 "verify system-testing defect models from upstream metrics"};
    app.require_subcommand(1);

    FitConfig fit_cfg;
    auto* fit = app.add_subcommand("fit", "fit one regression and print the summary");
    fit->add_option("--data", fit_cfg.data, "dataset CSV")->required();
    fit->add_option("--target", fit_cfg.target, "target column")->required();
    fit->add_option("--predictors", fit_cfg.predictors,
                    "comma-separated predictor columns")
        ->required()
        ->delimiter(',');
    fit->add_flag("--no-intercept", fit_cfg.no_intercept, "fit without a constant term");
    fit->add_option("--out", fit_cfg.out, "write the fitted model JSON here");
    fit->callback([&] { run_fit(fit_cfg); });

    RoundsConfig rounds_cfg;
    auto* rounds = app.add_subcommand(
        "rounds", "fit the four canonical rounds and gate each one");
    rounds->add_option("--data", rounds_cfg.data, "dataset CSV")->required();
    rounds->add_option("--gate", rounds_cfg.gate_spec,
                       "thresholds, e.g. p=0.05,r2=0.85,adj=0.85 "
                       "(defaults shown; an r2=0.90,adj=0.90 variant is the "
                       "stricter published alternative)");
    rounds->add_flag("--gate-intercept", rounds_cfg.gate_intercept,
                     "also gate the intercept p-value");
    rounds->add_option("--out", rounds_cfg.out, "directory for round1..round4 model files")
        ->required();
    rounds->add_flag("--strict", rounds_cfg.strict,
                     "exit 4 when no round passes the gate");
    rounds->callback([&] { run_rounds(rounds_cfg); });

    PredictConfig predict_cfg;
    auto* predict = app.add_subcommand("predict",
                                       "predict defects with intervals for new rows");
    predict->add_option("--model", predict_cfg.model, "model JSON file")->required();
    predict->add_option("--input", predict_cfg.input,
                        "CSV with the model's predictor columns")
        ->required();
    predict->add_option("--level", predict_cfg.level, "interval level in (0,1)");
    predict->add_option("--format", predict_cfg.format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));
    predict->callback([&] { run_predict(predict_cfg); });

    VerifyConfig verify_cfg;
    auto* verify = app.add_subcommand(
        "verify", "check predictions against observed defects and rank candidates");
    verify->add_option("--cases", verify_cfg.cases,
                       "cases CSV (label,predicted,actual,pi_low,pi_high)")
        ->required();
    verify->callback([&] { run_verify(verify_cfg); });

    DiagnoseConfig diagnose_cfg;
    auto* diagnose =
        app.add_subcommand("diagnose", "emit residual-diagnostic views for a model");
    diagnose->add_option("--model", diagnose_cfg.model, "model JSON file")->required();
    diagnose->add_option("--data", diagnose_cfg.data, "dataset CSV to diagnose against")
        ->required();
    diagnose->add_option("--out", diagnose_cfg.out, "output directory")->required();
    diagnose->add_option("--format", diagnose_cfg.format,
                         "comma list of csv and/or svg (default both)");
    diagnose->callback([&] { run_diagnose(diagnose_cfg); });

    BaselineConfig baseline_cfg;
    auto* baseline = app.add_subcommand(
        "baseline", "evaluate the historical size-based defect predictors");
    baseline->add_option("--loc", baseline_cfg.loc, "code size")->required();
    baseline->add_option("--unit", baseline_cfg.unit,
                         "unit of --loc: loc (raw lines, default) or kloc "
                         "(thousands; multiplied by 1000). The original "
                         "equations do not state their unit, so it is never "
                         "guessed.")
        ->check(CLI::IsMember({"loc", "kloc"}));
    baseline->callback([&] { run_baseline(baseline_cfg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ExitWith& e) {
        return e.code;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
