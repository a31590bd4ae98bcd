#include "defpred/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "defpred/errors.hpp"

namespace defpred::regress {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// A fit whose sse is this small relative to sst is treated as an exact
// interpolation: standard errors collapse to zero and t-stats are undefined.
constexpr double perfect_fit_ratio = 1e-24;

// Relative threshold below which the target is considered constant (sst = 0).
constexpr double constant_target_ratio = 1e-28;

std::vector<std::string> term_names_for(const ModelSpec& spec) {
    std::vector<std::string> names;
    names.reserve(spec.predictors.size() + 1);
    if (spec.include_intercept) names.push_back("intercept");
    names.insert(names.end(), spec.predictors.begin(), spec.predictors.end());
    return names;
}

} // namespace

FittedModel fit(const dataset::Dataset& d, const ModelSpec& spec) {
    validate_spec(spec);
    auto dm = dataset::design_matrix(d, spec);
    const std::size_t n = dm.x.rows();
    const std::size_t p = dm.x.cols();
    if (n <= p) {
        throw NumericError("insufficient degrees of freedom: n=" + std::to_string(n) +
                           " observations for p=" + std::to_string(p) + " parameters");
    }

    auto sol = numerics::qr_least_squares(dm.x, dm.y);

    FittedModel m;
    m.spec = spec;
    m.n = n;
    m.p = p;
    m.term_names = term_names_for(spec);
    m.coefficients = sol.beta;
    m.xtx_inv = numerics::xtx_inverse(sol.qr);

    m.fitted.assign(n, 0.0);
    m.residuals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < p; ++j) f += dm.x(i, j) * sol.beta[j];
        m.fitted[i] = f;
        m.residuals[i] = dm.y[i] - f;
    }

    m.sse = sol.sse;
    double sum_y = 0.0, sum_y2 = 0.0;
    for (double v : dm.y) {
        sum_y += v;
        sum_y2 += v * v;
    }
    if (spec.include_intercept) {
        const double mean = sum_y / static_cast<double>(n);
        double sst = 0.0;
        for (double v : dm.y) sst += (v - mean) * (v - mean);
        m.sst = sst;
    } else {
        m.sst = sum_y2;
    }
    if (m.sst <= constant_target_ratio * std::max(1.0, sum_y2)) {
        throw NumericError("undefined R-squared: target column '" + spec.target +
                           "' is constant");
    }

    const double df = static_cast<double>(n - p);
    m.degenerate_perfect_fit = m.sse <= perfect_fit_ratio * m.sst;
    m.s = std::sqrt(m.sse / df);

    m.r_squared = 1.0 - m.sse / m.sst;
    if (spec.include_intercept) m.r_squared = std::clamp(m.r_squared, 0.0, 1.0);
    m.adj_r_squared =
        1.0 - (1.0 - m.r_squared) * (static_cast<double>(n - 1) / df);

    m.std_errors.assign(p, 0.0);
    m.t_stats.assign(p, 0.0);
    m.p_values.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        m.std_errors[j] = m.s * std::sqrt(m.xtx_inv(j, j));
        if (m.degenerate_perfect_fit) {
            // Zero residual variance: the slope is exact, the test statistic
            // has no sampling distribution. Report p = 0 by convention.
            m.t_stats[j] = nan_value;
            m.p_values[j] = 0.0;
            continue;
        }
        m.t_stats[j] = m.coefficients[j] / m.std_errors[j];
        const double pv = 2.0 * (1.0 - numerics::t_cdf(std::fabs(m.t_stats[j]), df));
        m.p_values[j] = std::clamp(pv, 0.0, 1.0);
    }

    if (p > 1) {
        if (m.degenerate_perfect_fit) {
            // No residual variance to test against: the statistic diverges.
            m.f_stat = nan_value;
            m.f_p_value = 0.0;
        } else {
            m.f_stat = ((m.sst - m.sse) / static_cast<double>(p - 1)) / (m.sse / df);
            m.f_p_value = 1.0 - numerics::f_cdf(std::max(0.0, m.f_stat),
                                                static_cast<double>(p - 1), df);
        }
    } else {
        // Intercept-only model: no regression degrees of freedom.
        m.f_stat = nan_value;
        m.f_p_value = nan_value;
    }
    return m;
}

PredictionResult predict(const FittedModel& m, const std::vector<double>& x0,
                         double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DataError("interval level must lie in (0, 1)");
    }
    if (x0.size() != m.spec.predictors.size()) {
        throw DataError("predictor vector has " + std::to_string(x0.size()) +
                        " values, model expects " +
                        std::to_string(m.spec.predictors.size()));
    }
    for (double v : x0) {
        if (!std::isfinite(v)) throw DataError("non-finite predictor value");
    }
    if (m.xtx_inv.rows() != m.p || m.xtx_inv.cols() != m.p) {
        throw DataError("model cannot produce intervals: missing xtx_inv");
    }
    if (m.n <= m.p) throw DataError("model has no residual degrees of freedom");

    // Full term vector: optional leading 1 for the intercept, then x0.
    std::vector<double> t;
    t.reserve(m.p);
    if (m.spec.include_intercept) t.push_back(1.0);
    t.insert(t.end(), x0.begin(), x0.end());

    PredictionResult r;
    r.level = level;
    double point = 0.0;
    for (std::size_t j = 0; j < m.p; ++j) point += t[j] * m.coefficients[j];
    r.point = point;
    r.point_rounded = std::max(0LL, std::llround(point));

    double leverage = 0.0;
    for (std::size_t i = 0; i < m.p; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.p; ++j) row += m.xtx_inv(i, j) * t[j];
        leverage += t[i] * row;
    }
    r.leverage_term = leverage;

    const double df = static_cast<double>(m.n - m.p);
    const double tq = numerics::t_quantile(0.5 * (1.0 + level), df);
    const double pi_half = tq * m.s * std::sqrt(1.0 + leverage);
    const double ci_half = tq * m.s * std::sqrt(std::max(0.0, leverage));
    r.pi_low = point - pi_half;
    r.pi_high = point + pi_half;
    r.ci_low = point - ci_half;
    r.ci_high = point + ci_half;
    return r;
}

PredictionResult predict(const FittedModel& m,
                         const std::map<std::string, double>& values, double level) {
    std::vector<double> x0;
    x0.reserve(m.spec.predictors.size());
    for (const auto& name : m.spec.predictors) {
        const auto it = values.find(name);
        if (it == values.end()) {
            throw DataError("missing predictor value '" + name + "'");
        }
        x0.push_back(it->second);
    }
    return predict(m, x0, level);
}

ModelApplication apply_to(const FittedModel& m, const dataset::Dataset& d) {
    auto dm = dataset::design_matrix(d, m.spec);
    if (dm.x.cols() != m.p) {
        throw DataError("model/data column mismatch: design matrix has " +
                        std::to_string(dm.x.cols()) + " columns, model has " +
                        std::to_string(m.p) + " terms");
    }
    ModelApplication out;
    out.fitted.assign(dm.x.rows(), 0.0);
    out.residuals.assign(dm.x.rows(), 0.0);
    for (std::size_t i = 0; i < dm.x.rows(); ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < m.p; ++j) f += dm.x(i, j) * m.coefficients[j];
        out.fitted[i] = f;
        out.residuals[i] = dm.y[i] - f;
    }
    return out;
}

namespace {

// --- model-document writer -------------------------------------------------
// Hand-rolled so the numeric contract (17 significant digits, non-finite as
// null, fixed field order) is under direct control and output bytes are
// stable across platforms and library versions.

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_string_array(std::string& out, const std::vector<std::string>& values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += '"';
        out += json_escape(values[i]);
        out += '"';
    }
    out += ']';
}

void append_term_map(std::string& out, const char* key,
                     const std::vector<std::string>& names,
                     const std::vector<double>& values) {
    out += "  \"";
    out += key;
    out += "\": {";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += '"';
        out += json_escape(names[i]);
        out += "\": ";
        out += json_number(values[i]);
    }
    out += "}";
}

// --- model-document reader helpers ------------------------------------------

using json = nlohmann::json;

const json& require_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        if (std::string(key) == "xtx_inv") {
            throw DataError("model cannot produce intervals: missing field 'xtx_inv'");
        }
        throw DataError("model document missing field '" + std::string(key) + "'");
    }
    return *it;
}

// Numeric field that may legitimately be null (stored as NaN).
double read_number_or_null(const json& j, const std::string& where) {
    if (j.is_null()) return nan_value;
    if (!j.is_number()) {
        throw DataError("corrupted numeric field '" + where + "' in model document");
    }
    return j.get<double>();
}

// Numeric field that must be a finite number (prediction-critical).
double read_finite_number(const json& j, const std::string& where) {
    if (!j.is_number() || !std::isfinite(j.get<double>())) {
        throw DataError("corrupted numeric field '" + where + "' in model document");
    }
    return j.get<double>();
}

std::vector<double> read_term_values(const json& obj, const char* key,
                                     const std::vector<std::string>& order,
                                     bool must_be_finite) {
    const json& map = require_field(obj, key);
    if (!map.is_object() || map.size() != order.size()) {
        throw DataError("model document field '" + std::string(key) +
                        "' inconsistent with term_order (" +
                        std::to_string(map.is_object() ? map.size() : 0) + " vs " +
                        std::to_string(order.size()) + " terms)");
    }
    std::vector<double> values;
    values.reserve(order.size());
    for (const auto& name : order) {
        const auto it = map.find(name);
        if (it == map.end()) {
            throw DataError("model document field '" + std::string(key) +
                            "' missing term '" + name + "'");
        }
        const std::string where = std::string(key) + "." + name;
        values.push_back(must_be_finite ? read_finite_number(*it, where)
                                        : read_number_or_null(*it, where));
    }
    return values;
}

} // namespace

std::string serialize_model(const FittedModel& m) {
    std::string out;
    out.reserve(2048);
    out += "{\n";
    out += "  \"schema_version\": " + std::to_string(model_schema_version) + ",\n";
    out += "  \"spec\": {\n";
    out += "    \"target\": \"" + json_escape(m.spec.target) + "\",\n";
    out += "    \"predictors\": ";
    append_string_array(out, m.spec.predictors);
    out += ",\n";
    out += std::string("    \"include_intercept\": ") +
           (m.spec.include_intercept ? "true" : "false") + "\n";
    out += "  },\n";
    out += "  \"n\": " + std::to_string(m.n) + ",\n";
    out += "  \"p\": " + std::to_string(m.p) + ",\n";
    out += "  \"term_order\": ";
    append_string_array(out, m.term_names);
    out += ",\n";
    append_term_map(out, "coefficients", m.term_names, m.coefficients);
    out += ",\n";
    append_term_map(out, "std_errors", m.term_names, m.std_errors);
    out += ",\n";
    append_term_map(out, "t_stats", m.term_names, m.t_stats);
    out += ",\n";
    append_term_map(out, "p_values", m.term_names, m.p_values);
    out += ",\n";
    out += "  \"s\": " + json_number(m.s) + ",\n";
    out += "  \"sse\": " + json_number(m.sse) + ",\n";
    out += "  \"sst\": " + json_number(m.sst) + ",\n";
    out += "  \"r_squared\": " + json_number(m.r_squared) + ",\n";
    out += "  \"adj_r_squared\": " + json_number(m.adj_r_squared) + ",\n";
    out += "  \"f_stat\": " + json_number(m.f_stat) + ",\n";
    out += "  \"f_p_value\": " + json_number(m.f_p_value) + ",\n";
    out += "  \"xtx_inv\": [";
    for (std::size_t i = 0; i < m.xtx_inv.data().size(); ++i) {
        if (i) out += ", ";
        out += json_number(m.xtx_inv.data()[i]);
    }
    out += "],\n";
    out += std::string("  \"degenerate_perfect_fit\": ") +
           (m.degenerate_perfect_fit ? "true" : "false") + "\n";
    out += "}\n";
    return out;
}

FittedModel load_model(std::string_view document) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
    if (!j.is_object()) throw DataError("malformed model document: not an object");

    const json& ver = require_field(j, "schema_version");
    if (!ver.is_number_integer() || ver.get<std::int64_t>() != model_schema_version) {
        throw DataError("unsupported model schema_version (expected " +
                        std::to_string(model_schema_version) + ")");
    }

    FittedModel m;
    const json& spec = require_field(j, "spec");
    if (!spec.is_object()) throw DataError("model document field 'spec' must be an object");
    const json& target = require_field(spec, "target");
    if (!target.is_string()) throw DataError("model spec target must be a string");
    m.spec.target = target.get<std::string>();
    const json& preds = require_field(spec, "predictors");
    if (!preds.is_array()) throw DataError("model spec predictors must be an array");
    for (const auto& p : preds) {
        if (!p.is_string()) throw DataError("model spec predictors must be strings");
        m.spec.predictors.push_back(p.get<std::string>());
    }
    const json& inter = require_field(spec, "include_intercept");
    if (!inter.is_boolean()) throw DataError("model spec include_intercept must be a boolean");
    m.spec.include_intercept = inter.get<bool>();
    validate_spec(m.spec);

    const json& jn = require_field(j, "n");
    const json& jp = require_field(j, "p");
    if (!jn.is_number_unsigned() || !jp.is_number_unsigned()) {
        throw DataError("model document fields n and p must be non-negative integers");
    }
    m.n = jn.get<std::size_t>();
    m.p = jp.get<std::size_t>();

    const json& order = require_field(j, "term_order");
    if (!order.is_array()) throw DataError("model document term_order must be an array");
    for (const auto& t : order) {
        if (!t.is_string()) throw DataError("model document term_order must hold strings");
        m.term_names.push_back(t.get<std::string>());
    }

    const std::size_t expected_p =
        m.spec.predictors.size() + (m.spec.include_intercept ? 1 : 0);
    if (m.p != expected_p || m.term_names.size() != m.p) {
        throw DataError("inconsistent model document: p=" + std::to_string(m.p) +
                        ", term_order has " + std::to_string(m.term_names.size()) +
                        ", spec implies " + std::to_string(expected_p));
    }
    if (m.spec.include_intercept && m.term_names.front() != "intercept") {
        throw DataError("inconsistent model document: first term must be 'intercept'");
    }
    if (m.n <= m.p) {
        throw DataError("inconsistent model document: n=" + std::to_string(m.n) +
                        " must exceed p=" + std::to_string(m.p));
    }

    m.coefficients = read_term_values(j, "coefficients", m.term_names, true);
    m.std_errors = read_term_values(j, "std_errors", m.term_names, false);
    m.t_stats = read_term_values(j, "t_stats", m.term_names, false);
    m.p_values = read_term_values(j, "p_values", m.term_names, false);

    m.s = read_finite_number(require_field(j, "s"), "s");
    m.sse = read_finite_number(require_field(j, "sse"), "sse");
    m.sst = read_finite_number(require_field(j, "sst"), "sst");
    m.r_squared = read_finite_number(require_field(j, "r_squared"), "r_squared");
    m.adj_r_squared =
        read_finite_number(require_field(j, "adj_r_squared"), "adj_r_squared");
    m.f_stat = read_number_or_null(require_field(j, "f_stat"), "f_stat");
    m.f_p_value = read_number_or_null(require_field(j, "f_p_value"), "f_p_value");

    const json& inv = require_field(j, "xtx_inv");
    if (!inv.is_array() || inv.size() != m.p * m.p) {
        throw DataError("model cannot produce intervals: xtx_inv must hold " +
                        std::to_string(m.p * m.p) + " row-major entries");
    }
    m.xtx_inv = numerics::Matrix(m.p, m.p);
    for (std::size_t i = 0; i < inv.size(); ++i) {
        m.xtx_inv.data()[i] =
            read_finite_number(inv[i], "xtx_inv[" + std::to_string(i) + "]");
    }

    if (const auto it = j.find("degenerate_perfect_fit"); it != j.end()) {
        if (!it->is_boolean()) {
            throw DataError("model document degenerate_perfect_fit must be a boolean");
        }
        m.degenerate_perfect_fit = it->get<bool>();
    }
    return m;
}

} // namespace defpred::regress
