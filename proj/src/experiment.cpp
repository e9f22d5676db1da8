#include "qdyn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qdyn/models.hpp"
#include "qdyn/tcl.hpp"
#include "qdyn/volterra.hpp"

namespace qdyn {

namespace {

constexpr const char* kVersion = "qdyn 0.1.0";

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_number(const std::string& key, const std::string& value)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw InvalidConfig("non-numeric value for " + key + ": '" + value + "'");
    }
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "model.name") {
        cfg.model_name = value;
    } else if (key.rfind("model.", 0) == 0) {
        cfg.model_params[key.substr(6)] = to_number(key, value);
    } else if (key == "grid.t0") {
        cfg.grid_t0 = to_number(key, value);
    } else if (key == "grid.T") {
        cfg.grid_T = to_number(key, value);
    } else if (key == "grid.steps") {
        cfg.grid_steps = static_cast<int>(to_number(key, value));
    } else if (key == "pipeline") {
        cfg.pipeline = value;
    } else if (key == "tolerances.series_tol") {
        cfg.series_tol = to_number(key, value);
    } else if (key == "tolerances.lmax") {
        cfg.lmax = static_cast<int>(to_number(key, value));
    } else if (key == "tolerances.cp_tol") {
        cfg.cp_tol = to_number(key, value);
    } else if (key == "tolerances.cond_max") {
        cfg.cond_max = to_number(key, value);
    } else if (key == "outputs.report_path") {
        cfg.report_path = value;
    } else if (key == "outputs.table_path") {
        cfg.table_path = value;
    } else {
        throw InvalidConfig("unknown config key: " + key);
    }
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Trace-preservation defect and Choi floor over a family's stored cells.
struct CellStats {
    double trace_defect = 0.0;
    double min_choi_eig = 0.0;
};

CellStats family_stats(const TwoParamFamily& f)
{
    CellStats st;
    st.min_choi_eig = std::numeric_limits<double>::infinity();
    auto visit = [&](const SuperOp& s) {
        st.trace_defect = std::max(st.trace_defect, verdict_trace(s, TraceMode::preserving).defect);
        // large herm_tol: quadrature-level Choi asymmetry is part of the measurement
        st.min_choi_eig = std::min(st.min_choi_eig, verdict_cp(s, 0.0, 1e-2).min_eig);
    };
    if (f.is_homogeneous_storage()) {
        for (const auto& s : f.values) {
            visit(s);
        }
    } else {
        for (int i = 0; i <= f.grid.n; ++i) {
            for (int j = 0; j <= i; ++j) {
                visit(f.at(i, j));
            }
        }
    }
    return st;
}

std::string make_table(const TwoParamFamily& f, bool dump_maps)
{
    std::ostringstream out;
    const int dd = f.dim() * f.dim();
    out << "t,s,trace_defect,min_choi_eig";
    if (dump_maps) {
        for (int r = 0; r < dd; ++r) {
            for (int c = 0; c < dd; ++c) {
                out << ",re_" << r << "_" << c << ",im_" << r << "_" << c;
            }
        }
    }
    out << "\n";
    for (int i = 0; i <= f.grid.n; ++i) {
        const SuperOp& s = f.at(i, 0);
        out << fmt(f.grid.node(i)) << "," << fmt(f.grid.node(0)) << ","
            << fmt(verdict_trace(s, TraceMode::preserving).defect) << ","
            << fmt(verdict_cp(s, 0.0, 1e-2).min_eig);
        if (dump_maps) {
            for (int r = 0; r < dd; ++r) {
                for (int c = 0; c < dd; ++c) {
                    out << "," << fmt(s.mat(r, c).real()) << "," << fmt(s.mat(r, c).imag());
                }
            }
        }
        out << "\n";
    }
    return out.str();
}

double roundtrip_defect(const TwoParamFamily& family, double cond_max)
{
    const TCLFamily tcl = extract_tcl(family, 0, cond_max);
    if (!tcl.complete()) {
        throw SingularMap("TCL column incomplete; roundtrip undefined");
    }
    const TwoParamFamily re = integrate_tcl(tcl);
    double defect = 0.0;
    for (int i = 0; i <= family.grid.n; ++i) {
        defect = std::max(defect, spectral_norm(re.at(i, 0).mat - family.at(i, 0).mat));
    }
    return defect;
}

} // namespace

void ExperimentConfig::validate() const
{
    if (model_name.empty()) {
        throw InvalidConfig("model.name is required");
    }
    if (!(grid_T > grid_t0)) {
        throw InvalidConfig("grid requires T > t0");
    }
    if (grid_steps < 1) {
        throw InvalidConfig("grid.steps must be >= 1");
    }
    if (series_tol <= 0.0 || cp_tol <= 0.0 || cond_max <= 0.0 || lmax < 1) {
        throw InvalidConfig("tolerances must be positive");
    }
    static const char* pipelines[] = {"series", "volterra", "tcl", "verify", "crosscheck"};
    if (std::find(std::begin(pipelines), std::end(pipelines), pipeline)
        == std::end(pipelines)) {
        throw InvalidConfig("unknown pipeline: " + pipeline);
    }
}

ExperimentConfig parse_config_text(const std::string& text)
{
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        }
        assign(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw InvalidConfig("override must be key=value: " + assignment);
    }
    assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Report::all_pass() const
{
    for (const auto& [name, ok] : checks) {
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::string format_report(const Report& report)
{
    std::ostringstream out;
    out << "version = " << report.version << "\n";
    for (const auto& [k, v] : report.config_echo) {
        out << "config." << k << " = " << v << "\n";
    }
    for (const auto& [k, v] : report.metrics) {
        out << "metric." << k << " = " << fmt(v) << "\n";
    }
    for (const auto& [k, ok] : report.checks) {
        out << "check." << k << " = " << (ok ? "pass" : "fail") << "\n";
    }
    out << "result = " << (report.all_pass() ? "pass" : "fail") << "\n";
    return out.str();
}

RunOutput run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const double h = (cfg.grid_T - cfg.grid_t0) / cfg.grid_steps;
    const TimeGrid grid(cfg.grid_t0, h, cfg.grid_steps);
    const double h2_budget = 10.0 * h * h;

    const ModelDescriptor md = make_model(cfg.model_name, cfg.model_params);
    JumpModel jm = md.build(grid);
    validate_model(jm, cfg.cp_tol);

    RunOutput out;
    Report& rep = out.report;
    rep.version = kVersion;
    rep.config_echo.emplace_back("model.name", cfg.model_name);
    for (const auto& [k, v] : cfg.model_params) {
        rep.config_echo.emplace_back("model." + k, fmt(v));
    }
    rep.config_echo.emplace_back("grid.t0", fmt(cfg.grid_t0));
    rep.config_echo.emplace_back("grid.T", fmt(cfg.grid_T));
    rep.config_echo.emplace_back("grid.steps", fmt(cfg.grid_steps));
    rep.config_echo.emplace_back("pipeline", cfg.pipeline);

    const SeriesOptions opt{cfg.series_tol, cfg.lmax};
    auto add_stats = [&](const TwoParamFamily& f) {
        const CellStats st = family_stats(f);
        rep.metrics.emplace_back("trace_defect", st.trace_defect);
        rep.metrics.emplace_back("min_choi_eig", st.min_choi_eig);
        rep.checks.emplace_back("cp", st.min_choi_eig >= -1e-6);
        rep.checks.emplace_back("trace", st.trace_defect <= std::max(1e-6, h2_budget));
        return st;
    };

    auto timed_series = [&]() {
        const auto start = std::chrono::steady_clock::now();
        SeriesResult res = run_series(jm, opt);
        out.series_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        return res;
    };
    auto timed_volterra = [&]() {
        const auto start = std::chrono::steady_clock::now();
        TwoParamFamily sol = solve_volterra(kernel_from_model(jm), grid);
        out.volterra_seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
        return sol;
    };

    if (cfg.pipeline == "series") {
        const SeriesResult res = timed_series();
        rep.metrics.emplace_back("truncation_norm", res.truncation_norm);
        rep.metrics.emplace_back("terms", static_cast<double>(res.terms.size()));
        rep.checks.emplace_back("series_converged", res.converged);
        add_stats(res.total);
        out.table_csv = make_table(res.total, cfg.dump_maps);
    } else if (cfg.pipeline == "volterra") {
        const TwoParamFamily sol = timed_volterra();
        add_stats(sol);
        out.table_csv = make_table(sol, cfg.dump_maps);
    } else if (cfg.pipeline == "tcl") {
        const SeriesResult res = timed_series();
        rep.metrics.emplace_back("tcl_roundtrip_defect",
                                 roundtrip_defect(res.total, cfg.cond_max));
        rep.metrics.emplace_back("composition_defect", composition_defect(res.total));
        rep.checks.emplace_back("tcl_roundtrip", rep.metrics[0].second <= h2_budget);
        out.table_csv = make_table(res.total, cfg.dump_maps);
    } else if (cfg.pipeline == "verify") {
        const SeriesResult res = timed_series();
        rep.metrics.emplace_back("truncation_norm", res.truncation_norm);
        rep.checks.emplace_back("series_converged", res.converged);
        add_stats(res.total);
        const double comp = composition_defect(res.total);
        rep.metrics.emplace_back("composition_defect", comp);
        const bool non_markov = comp > h2_budget;
        rep.metrics.emplace_back("non_markovian", non_markov ? 1.0 : 0.0);
        rep.config_echo.emplace_back("non_markovian", non_markov ? "yes" : "no");
        out.table_csv = make_table(res.total, cfg.dump_maps);
    } else { // crosscheck
        const SeriesResult res = timed_series();
        const TwoParamFamily sol = timed_volterra();
        const double disagreement = sup_diff(res.total, sol);
        rep.metrics.emplace_back("truncation_norm", res.truncation_norm);
        rep.metrics.emplace_back("series_volterra_disagreement", disagreement);
        rep.checks.emplace_back("series_converged", res.converged);
        rep.checks.emplace_back("series_volterra_agree", disagreement <= h2_budget);
        if (!jm.jump.has_delta()) {
            const double nme = new_me_residual(res.total, jm.free, jm.jump.regular);
            rep.metrics.emplace_back("new_me_residual", nme);
            rep.checks.emplace_back("new_me", nme <= h2_budget);
        } else {
            rep.config_echo.emplace_back("skipped.new_me_residual",
                                         "jump kernel has a delta part");
        }
        add_stats(res.total);
        out.table_csv = make_table(res.total, cfg.dump_maps);
    }
    return out;
}

Report run_and_write(const ExperimentConfig& cfg)
{
    RunOutput out = run_experiment(cfg);
    if (!cfg.report_path.empty()) {
        std::ofstream f(cfg.report_path);
        if (!f) {
            throw Error("cannot write report file: " + cfg.report_path);
        }
        f << format_report(out.report);
    }
    if (!cfg.table_path.empty()) {
        std::ofstream f(cfg.table_path);
        if (!f) {
            throw Error("cannot write table file: " + cfg.table_path);
        }
        f << out.table_csv;
    }
    return out.report;
}

} // namespace qdyn
