// experiment.hpp — config-driven experiment runner behind the CLI: build a
// registered model on a grid, run a pipeline, and emit a deterministic
// key-value report plus a CSV table.
//
// Config grammar: plain text, one `key = value` per line, `#` comments,
// blank lines ignored. Keys:
//   model.name            registered model name
//   model.<param>         numeric model parameter (e.g. model.kappa = 1)
//   grid.t0 grid.T        window (T > t0)
//   grid.steps            number of steps (>= 1)
//   pipeline              series | volterra | tcl | verify | crosscheck
//   tolerances.series_tol tolerances.lmax tolerances.cp_tol tolerances.cond_max
//   outputs.report_path   outputs.table_path

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qdyn {

struct ExperimentConfig {
    std::string model_name;
    std::map<std::string, double> model_params;
    double grid_t0 = 0.0;
    double grid_T = 1.0;
    int grid_steps = 0;
    std::string pipeline;
    double series_tol = 1e-10;
    int lmax = 64;
    double cp_tol = 1e-8;
    double cond_max = 1e8;
    std::string report_path;
    std::string table_path;
    bool dump_maps = false;

    void validate() const; // throws InvalidConfig
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
// `--set key=value` override, same keys as the config file.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

struct Report {
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::pair<std::string, double>> metrics;  // insertion-ordered
    std::vector<std::pair<std::string, bool>> checks;
    std::string version;

    bool all_pass() const;
};

// Deterministic rendering of the report (runtimes are deliberately excluded
// from the file so repeated runs are byte-identical; the CLI prints them to
// the terminal instead).
std::string format_report(const Report& report);

struct RunOutput {
    Report report;
    std::string table_csv;
    double series_seconds = 0.0;   // informational, not part of the report
    double volterra_seconds = 0.0;
};

RunOutput run_experiment(const ExperimentConfig& cfg);

// Writes report/table files when paths are configured; returns the report.
Report run_and_write(const ExperimentConfig& cfg);

} // namespace qdyn
