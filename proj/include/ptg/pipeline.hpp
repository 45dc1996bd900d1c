#pragma once

#include "ptg/assignment.hpp"
#include "ptg/config.hpp"
#include "ptg/evaluation.hpp"
#include "ptg/landscapes.hpp"

#include <string>
#include <vector>

namespace ptg {

/// Step 2: carry the coarse-stage posterior means onto the expanded node set
/// by GP regression. r and g interpolate under their own prior kernels (g is
/// clamped positive), the columns of H under the non-stationary kernel with
/// the interpolated length-scale field; beta carries over unchanged.
LatentState interpolate_state(const PosteriorSummary& coarse, const NodeSet& coarse_nodes,
                              const NodeSet& fine_nodes, const Priors& priors);

struct PtgRunResult {
    int restart = 0;
    std::uint64_t seed = 0;
    PeriodicTable table;
    LatentState final_state;
    std::vector<TraceRow> trace;
    std::vector<double> fine_tune_joint_trace;
    int fine_tune_best_iter = 0;
    double coarse_beta_bar = 0.0;
    double accept_rate_r = 0.0;
    double max_jitter = 0.0;
    double elapsed_seconds = 0.0;
};

/// One full coarse -> expand -> fine-tune pipeline for restart index
/// `restart` (chain seed derived from the master seed).
PtgRunResult run_ptg_single(const Eigen::MatrixXd& X, const std::vector<Element>& elements,
                            const RunConfig& config, int restart,
                            const std::string& checkpoint_path = "");

/// All restarts on a bounded worker pool; results sorted by final
/// log-likelihood, best first. Stage failures carry the stage and seed.
std::vector<PtgRunResult> run_ptg(const Eigen::MatrixXd& X, const std::vector<Element>& elements,
                                  const RunConfig& config);

int resolve_workers(int configured, int jobs);

// ---- run-directory commands (the CLI surface) ----

/// Load + standardize data, run all restarts, write tables (CSV/JSON),
/// SVGs, traces, checkpoints and the manifest. Returns the run directory.
std::string cmd_generate(const RunConfig& config);

/// Cross-validate every table in the run directory plus the built-in
/// standard-table descriptor against a compound CSV; rank by MAE, flag the
/// selected table in the manifest, export reports and enrichment tables.
void cmd_evaluate(const std::string& run_dir, const std::string& compounds_csv, int workers = 0);

/// Render one landscape (or all features) for a table in the run directory.
void cmd_landscape(const std::string& run_dir, const std::string& feature, int table_index = -1);

/// Complete the missing restarts of an interrupted generate run, resuming
/// checkpointed chains where possible.
void cmd_resume(const std::string& run_dir);

} // namespace ptg
