#include "medpath/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "medpath/core_model.hpp"

namespace medpath {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void atomic_write_text(const fs::path& path, const std::string& content) {
    const fs::path dir = path.parent_path().empty() ? "." : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

void write_json_file(const Json& j, const fs::path& path) {
    atomic_write_text(path, j.dump(2) + "\n");
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ContractError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

Dataset read_dataset_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ContractError("dataset CSV is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 3 || header[0] != "y" || header[1] != "x")
        throw ContractError("dataset CSV header must be y,x,m1,...,mp: " + path.string());
    const std::size_t p = header.size() - 2;
    for (std::size_t i = 0; i < p; ++i)
        if (header[2 + i] != "m" + std::to_string(i + 1))
            throw ContractError("dataset CSV header must be y,x,m1,...,mp: " + path.string());

    std::vector<std::array<double, 2>> yx;
    std::vector<double> mflat;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> values;
        values.reserve(p + 2);
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc{} || ptr != end)
                throw ContractError("bad number '" + cell + "' at data row " +
                                    std::to_string(row) + " of " + path.string());
            values.push_back(v);
        }
        if (values.size() != p + 2)
            throw ContractError("row " + std::to_string(row) + " has " +
                                std::to_string(values.size()) + " cells, expected " +
                                std::to_string(p + 2) + " in " + path.string());
        yx.push_back({values[0], values[1]});
        mflat.insert(mflat.end(), values.begin() + 2, values.end());
    }

    Dataset data;
    const Index n = static_cast<Index>(yx.size());
    data.y.resize(n);
    data.x.resize(n);
    data.m.resize(n, static_cast<Index>(p));
    for (Index i = 0; i < n; ++i) {
        data.y[i] = yx[static_cast<std::size_t>(i)][0];
        data.x[i] = yx[static_cast<std::size_t>(i)][1];
        for (Index j = 0; j < static_cast<Index>(p); ++j)
            data.m(i, j) = mflat[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
    }
    validate(data);
    return data;
}

void write_dataset_csv(const Dataset& data, const fs::path& path) {
    validate(data);
    std::string out;
    out.reserve(static_cast<std::size_t>(data.n()) * (static_cast<std::size_t>(data.p()) + 2) * 12);
    out += "y,x";
    for (Index j = 0; j < data.p(); ++j) out += ",m" + std::to_string(j + 1);
    out += "\n";
    for (Index i = 0; i < data.n(); ++i) {
        out += format_double(data.y[i]);
        out += ',';
        out += format_double(data.x[i]);
        for (Index j = 0; j < data.p(); ++j) {
            out += ',';
            out += format_double(data.m(i, j));
        }
        out += "\n";
    }
    atomic_write_text(path, out);
}

namespace {

Json vec_to_json(const Vec& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vec vec_from_json(const Json& arr, const char* what) {
    if (!arr.is_array()) throw ContractError(std::string("expected array for ") + what);
    Vec v(static_cast<Index>(arr.size()));
    Index i = 0;
    for (const auto& x : arr) {
        if (!x.is_number()) throw ContractError(std::string("expected numbers in ") + what);
        v[i++] = x.get<double>();
    }
    return v;
}

std::vector<double> list_from_json(const Json& arr, const char* what) {
    if (!arr.is_array()) throw ContractError(std::string("expected array for ") + what);
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw ContractError(std::string("expected numbers in ") + what);
        v.push_back(x.get<double>());
    }
    return v;
}

const Json& require(const Json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw ContractError(std::string(ctx) + ": missing required key '" + key + "'");
    return *it;
}

}  // namespace

Json to_json(const PenaltyConfig& pen) {
    return Json{{"variant", to_string(pen.variant)},
                {"lambda_alpha", pen.lambda_alpha},
                {"lambda_beta", pen.lambda_beta},
                {"lambda_gamma", pen.lambda_gamma},
                {"gamma_floor", pen.gamma_floor},
                {"kappa", pen.kappa},
                {"nu", pen.nu},
                {"strategy", to_string(pen.strategy)}};
}

PenaltyConfig penalty_config_from_json(const Json& j) {
    PenaltyConfig pen;
    pen.variant = penalty_variant_from_string(require(j, "variant", "penalty").get<std::string>());
    pen.lambda_alpha = require(j, "lambda_alpha", "penalty").get<double>();
    pen.lambda_beta = require(j, "lambda_beta", "penalty").get<double>();
    pen.lambda_gamma = require(j, "lambda_gamma", "penalty").get<double>();
    pen.gamma_floor = j.value("gamma_floor", 0.0);
    pen.kappa = j.value("kappa", 0.0);
    pen.nu = j.value("nu", 2.0);
    pen.strategy = gamma_strategy_from_string(require(j, "strategy", "penalty").get<std::string>());
    pen.validate();
    return pen;
}

Json to_json(const SolverConfig& cfg) {
    return Json{{"max_iter", cfg.max_iter},     {"tol_primal", cfg.tol_primal},
                {"tol_dual", cfg.tol_dual},     {"rho", cfg.rho},
                {"nonzero_tol", cfg.nonzero_tol}, {"seed", cfg.seed}};
}

SolverConfig solver_config_from_json(const Json& j) {
    SolverConfig cfg;
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.tol_primal = j.value("tol_primal", cfg.tol_primal);
    cfg.tol_dual = j.value("tol_dual", cfg.tol_dual);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.nonzero_tol = j.value("nonzero_tol", cfg.nonzero_tol);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

Json to_json(const GridSpec& grid) {
    return Json{{"lambda_alpha_values", grid.lambda_alpha_values},
                {"lambda_beta_values", grid.lambda_beta_values},
                {"lambda_gamma_values", grid.lambda_gamma_values},
                {"strategy", to_string(grid.strategy)},
                {"gamma_floor", grid.gamma_floor}};
}

GridSpec grid_spec_from_json(const Json& j) {
    GridSpec grid;
    if (j.contains("lambda_alpha_values"))
        grid.lambda_alpha_values = list_from_json(j["lambda_alpha_values"], "lambda_alpha_values");
    if (j.contains("lambda_beta_values"))
        grid.lambda_beta_values = list_from_json(j["lambda_beta_values"], "lambda_beta_values");
    if (j.contains("lambda_gamma_values"))
        grid.lambda_gamma_values = list_from_json(j["lambda_gamma_values"], "lambda_gamma_values");
    if (j.contains("strategy"))
        grid.strategy = gamma_strategy_from_string(j["strategy"].get<std::string>());
    grid.gamma_floor = j.value("gamma_floor", 0.0);
    grid.validate();
    return grid;
}

Json to_json(const Scenario& sc) {
    Json j{{"n", sc.n},
           {"p", sc.p},
           {"gamma_true", sc.gamma_true},
           {"frac_alpha_nonzero", sc.frac_alpha_nonzero},
           {"beta_pattern", sc.beta_pattern},
           {"large_signal",
            {{"fraction", sc.large_signal.fraction}, {"mean", sc.large_signal.mean},
             {"sd", sc.large_signal.sd}}},
           {"small_signal",
            {{"fraction", sc.small_signal.fraction}, {"mean", sc.small_signal.mean},
             {"sd", sc.small_signal.sd}}},
           {"mediator_rho", sc.mediator_rho},
           {"outcome_sd", sc.outcome_sd},
           {"seed", sc.seed}};
    j["target_tie"] = sc.target_tie ? Json(*sc.target_tie) : Json(nullptr);
    return j;
}

Scenario scenario_from_json(const Json& j) {
    Scenario sc;
    sc.n = j.value("n", sc.n);
    sc.p = j.value("p", sc.p);
    sc.gamma_true = j.value("gamma_true", sc.gamma_true);
    sc.frac_alpha_nonzero = j.value("frac_alpha_nonzero", sc.frac_alpha_nonzero);
    if (j.contains("beta_pattern")) {
        sc.beta_pattern = j["beta_pattern"].get<std::vector<double>>();
    }
    const auto tier = [&](const char* key, SignalTier& t) {
        if (!j.contains(key)) return;
        const Json& tj = j[key];
        t.fraction = tj.value("fraction", t.fraction);
        t.mean = tj.value("mean", t.mean);
        t.sd = tj.value("sd", t.sd);
    };
    tier("large_signal", sc.large_signal);
    tier("small_signal", sc.small_signal);
    sc.mediator_rho = j.value("mediator_rho", sc.mediator_rho);
    sc.outcome_sd = j.value("outcome_sd", sc.outcome_sd);
    sc.seed = j.value("seed", sc.seed);
    if (j.contains("target_tie") && !j["target_tie"].is_null())
        sc.target_tie = j["target_tie"].get<double>();
    sc.validate();
    return sc;
}

Json to_json(const FitResult& fit) {
    Json supports_a = Json::array(), supports_b = Json::array();
    for (bool s : fit.support_alpha) supports_a.push_back(s ? 1 : 0);
    for (bool s : fit.support_beta) supports_b.push_back(s ? 1 : 0);
    return Json{{"params",
                 {{"alpha", vec_to_json(fit.params.alpha)},
                  {"beta", vec_to_json(fit.params.beta)},
                  {"gamma", fit.params.gamma}}},
                {"effects",
                 {{"de", fit.effects.de},
                  {"ie", vec_to_json(fit.effects.ie)},
                  {"tie", fit.effects.tie},
                  {"te", fit.effects.te}}},
                {"objective", fit.objective},
                {"bic", fit.bic},
                {"iterations", fit.iterations},
                {"converged", fit.converged},
                {"support_alpha", supports_a},
                {"support_beta", supports_b},
                {"q", fit.q},
                {"error", fit.error}};
}

FitResult fit_result_from_json(const Json& j) {
    FitResult fit;
    const Json& params = require(j, "params", "fit");
    fit.params.alpha = vec_from_json(require(params, "alpha", "fit.params"), "alpha");
    fit.params.beta = vec_from_json(require(params, "beta", "fit.params"), "beta");
    fit.params.gamma = require(params, "gamma", "fit.params").get<double>();
    fit.effects = effects(fit.params);
    fit.objective = j.value("objective", 0.0);
    fit.bic = j.value("bic", 0.0);
    fit.iterations = j.value("iterations", 0);
    fit.converged = j.value("converged", false);
    fit.q = j.value("q", 0);
    fit.error = j.value("error", std::string{});
    if (j.contains("support_alpha"))
        for (const auto& v : j["support_alpha"]) fit.support_alpha.push_back(v.get<int>() != 0);
    if (j.contains("support_beta"))
        for (const auto& v : j["support_beta"]) fit.support_beta.push_back(v.get<int>() != 0);
    return fit;
}

Json to_json(const MetricsReport& m) {
    Json j{{"tpr", m.tpr},
           {"tnr", m.tnr},
           {"tdr", m.tdr},
           {"f1", m.f1},
           {"youden", m.youden},
           {"mse_alpha", m.mse_alpha},
           {"mse_beta", m.mse_beta},
           {"mse_ie", m.mse_ie},
           {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}}}};
    j["rb_ie"] = m.rb_ie ? Json(*m.rb_ie) : Json(nullptr);
    j["rb_de"] = m.rb_de ? Json(*m.rb_de) : Json(nullptr);
    return j;
}

MetricsReport metrics_report_from_json(const Json& j) {
    MetricsReport m;
    m.tpr = j.value("tpr", 0.0);
    m.tnr = j.value("tnr", 0.0);
    m.tdr = j.value("tdr", 0.0);
    m.f1 = j.value("f1", 0.0);
    m.youden = j.value("youden", 0.0);
    m.mse_alpha = j.value("mse_alpha", 0.0);
    m.mse_beta = j.value("mse_beta", 0.0);
    m.mse_ie = j.value("mse_ie", 0.0);
    if (j.contains("rb_ie") && !j["rb_ie"].is_null()) m.rb_ie = j["rb_ie"].get<double>();
    if (j.contains("rb_de") && !j["rb_de"].is_null()) m.rb_de = j["rb_de"].get<double>();
    if (j.contains("confusion")) {
        const Json& c = j["confusion"];
        m.tp = c.value("tp", 0L);
        m.fp = c.value("fp", 0L);
        m.tn = c.value("tn", 0L);
        m.fn = c.value("fn", 0L);
    }
    return m;
}

Json to_json(const ScreenResult& s) {
    Json idx = Json::array();
    for (Index i : s.kept_indices) idx.push_back(i);
    return Json{{"kept_indices", idx},
                {"scores", vec_to_json(s.scores)},
                {"d", static_cast<Index>(s.kept_indices.size())}};
}

Json to_json(const Truth& t) {
    Json types = Json::array();
    for (MediatorType mt : t.mediator_type) types.push_back(static_cast<int>(mt) + 1);
    return Json{{"params",
                 {{"alpha", vec_to_json(t.params.alpha)},
                  {"beta", vec_to_json(t.params.beta)},
                  {"gamma", t.params.gamma}}},
                {"effects",
                 {{"de", t.effects.de},
                  {"ie", vec_to_json(t.effects.ie)},
                  {"tie", t.effects.tie},
                  {"te", t.effects.te}}},
                {"mediator_type", types},
                {"outcome_noise", vec_to_json(t.outcome_noise)}};
}

Truth truth_from_json(const Json& j) {
    Truth t;
    const Json& params = require(j, "params", "truth");
    t.params.alpha = vec_from_json(require(params, "alpha", "truth.params"), "alpha");
    t.params.beta = vec_from_json(require(params, "beta", "truth.params"), "beta");
    t.params.gamma = require(params, "gamma", "truth.params").get<double>();
    t.effects = effects(t.params);
    if (j.contains("mediator_type"))
        for (const auto& v : j["mediator_type"])
            t.mediator_type.push_back(static_cast<MediatorType>(v.get<int>() - 1));
    if (j.contains("outcome_noise"))
        t.outcome_noise = vec_from_json(j["outcome_noise"], "outcome_noise");
    return t;
}

std::vector<std::string> schema_errors(const Json& doc, const Json& schema) {
    std::vector<std::string> errors;
    const std::function<void(const Json&, const Json&, std::string)> walk =
        [&](const Json& node, const Json& spec, std::string where) {
            if (spec.contains("type")) {
                const std::string type = spec["type"].get<std::string>();
                const bool ok = (type == "object" && node.is_object()) ||
                                (type == "array" && node.is_array()) ||
                                (type == "string" && node.is_string()) ||
                                (type == "number" && node.is_number()) ||
                                (type == "integer" && node.is_number_integer()) ||
                                (type == "boolean" && node.is_boolean()) ||
                                (type == "null" && node.is_null());
                if (!ok) {
                    errors.push_back(where + ": expected " + type);
                    return;
                }
            }
            if (spec.contains("enum")) {
                bool found = false;
                for (const auto& v : spec["enum"]) found = found || v == node;
                if (!found) errors.push_back(where + ": value not in enum");
            }
            if (spec.contains("required"))
                for (const auto& key : spec["required"])
                    if (!node.contains(key.get<std::string>()))
                        errors.push_back(where + ": missing required '" +
                                         key.get<std::string>() + "'");
            if (spec.contains("properties") && node.is_object())
                for (const auto& [key, sub] : spec["properties"].items())
                    if (node.contains(key)) walk(node[key], sub, where + "/" + key);
            if (spec.contains("items") && node.is_array())
                for (std::size_t i = 0; i < node.size(); ++i)
                    walk(node[i], spec["items"], where + "[" + std::to_string(i) + "]");
            if (spec.contains("oneOf")) {
                for (const auto& alt : spec["oneOf"]) {
                    if (schema_errors(node, alt).empty()) return;
                }
                errors.push_back(where + ": no oneOf alternative matched");
            }
        };
    walk(doc, schema, "");
    return errors;
}

}  // namespace medpath
