#pragma once

#include "ptg/assignment.hpp"
#include "ptg/data_model.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace ptg {

/// Element coordinates used as a descriptor: one L-vector per element.
struct Descriptor {
    std::string name;
    std::vector<std::string> symbols;
    Eigen::MatrixXd coords; // N x L

    int n() const { return static_cast<int>(coords.rows()); }
    int l() const { return static_cast<int>(coords.cols()); }
    int index_of(const std::string& symbol) const;
};

Descriptor descriptor_from_table(const PeriodicTable& table, const std::string& name);

/// The standard periodic table as a descriptor: (group, period) of each
/// element in `table`, scaled per axis to [-1, 1] (groups 1-18, periods 1-5
/// cover H through Xe).
Descriptor standard_table_descriptor(const ElementTable& table);

/// Compositional descriptor phi(S): weights times element coordinates.
Eigen::VectorXd phi(const Composition& comp, const Descriptor& descriptor);

/// Feature matrix of phi(S_i) for every record.
Eigen::MatrixXd phi_features(const CompoundDataset& dataset, const Descriptor& descriptor);

struct ForestHyperparams {
    int trees = 100;
    int min_leaf = 5;
    int max_features = 0; // 0 = ceil(L/3), minimum 1
    int max_depth = 0;    // 0 = unbounded
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    ForestHyperparams params;
    std::uint64_t seed = 0;
    double train_min = 0.0, train_max = 0.0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Eigen::VectorXd predict_all(const Eigen::MatrixXd& x) const;
};

/// Bagged regression trees: bootstrap resamples, random feature subset per
/// split, variance-reduction criterion. Deterministic under a fixed seed;
/// trees fit in parallel on derived substreams.
ForestModel rf_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   const ForestHyperparams& params, std::uint64_t seed, int workers = 1);

struct EvalReport {
    std::string descriptor_name;
    double mae_mean = 0.0, mae_std = 0.0;
    double rmse_mean = 0.0, rmse_std = 0.0;
    int folds = 0, repeats = 0;
    std::vector<double> mae_per_repeat, rmse_per_repeat;
    /// Mean absolute error of each compound over the repeats (each compound
    /// is in the test fold exactly once per repeat).
    std::vector<double> per_compound_abs_err;
    /// fold_of[repeat][compound]
    std::vector<std::vector<int>> fold_of;
};

struct CvConfig {
    int folds = 5;
    int repeats = 5;
    std::uint64_t seed = 7;
    int workers = 1;
    ForestHyperparams forest;
};

/// Repeated k-fold cross-validation with folds stratified by target
/// quantile. Deterministic under a fixed seed.
EvalReport cross_validate(const CompoundDataset& dataset, const Descriptor& descriptor,
                          const CvConfig& config);

struct EnrichmentRow {
    std::string symbol;
    int observed = 0;      // compounds in the subset containing the element
    double expected = 0.0; // subset size x background incidence rate
    double ratio = 0.0;    // observed / expected; NaN when undefined
};

struct EnrichmentTable {
    std::vector<int> subset_a, subset_b; // compound indices
    std::vector<EnrichmentRow> rows_a, rows_b;
};

/// Error-subset enrichment: subset A holds compounds where report_a's error
/// is below `low` and report_b's exceeds it by more than `margin`; subset B
/// is the mirror image. Element incidence is counted once per compound and
/// compared against the background incidence over the whole dataset.
EnrichmentTable enrichment(const EvalReport& report_a, const EvalReport& report_b,
                           const CompoundDataset& background, double low = 0.3,
                           double margin = 1.0);

} // namespace ptg
