#pragma once

#include "ptg/data_model.hpp"
#include "ptg/layouts.hpp"
#include "ptg/sampler.hpp"

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ptg {

/// N x K matrix of squared Euclidean distances ||x_n - y_k||^2.
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

struct AssignResult {
    std::vector<int> node_of; // element -> node, injective
    double objective = 0.0;   // sum of selected costs
};

/// Exact minimum-cost one-to-one matching of N rows to K >= N columns
/// (shortest augmenting path with potentials). Deterministic: cost ties are
/// resolved toward the lower column index.
AssignResult solve_assignment(const Eigen::MatrixXd& cost);

struct Provenance {
    std::uint64_t seed = 0;
    std::string config_hash;
    double final_loglik = 0.0;
};

/// The final artifact: an injective element -> node map over a node layout.
struct PeriodicTable {
    std::vector<Element> elements;
    std::vector<int> node_of;
    NodeSet nodes;
    Provenance provenance;

    int n() const { return static_cast<int>(elements.size()); }
    Eigen::MatrixXd element_coords() const; // N x L assigned node coordinates
    void check_invariants() const;          // injectivity, completeness
};

struct FineTuneResult {
    LatentState state;             // best iterate
    std::vector<int> node_of;      // its assignment
    double best_joint = 0.0;       // joint log density of the best iterate
    int best_iter = 0;             // 0 = the initial assignment state
    std::vector<double> joint_trace;
};

/// Algorithm: iterate T' rounds of {Z by exact assignment, beta/g/H to their
/// conditional modes, r by Newton ascent of its log conditional}; return the
/// iterate with the highest joint log density.
FineTuneResult fine_tune(const Eigen::MatrixXd& X, const NodeSet& fine_nodes,
                         const LatentState& interpolated, const Priors& priors, int iters);

} // namespace ptg
