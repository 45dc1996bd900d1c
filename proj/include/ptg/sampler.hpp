#pragma once

#include "ptg/gp_kernels.hpp"
#include "ptg/layouts.hpp"
#include "ptg/rng.hpp"

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace ptg {

/// Full parameter state of one chain. The assignment matrix is stored as a
/// node index per element (each column of the 0/1 matrix has exactly one 1).
struct LatentState {
    Eigen::VectorXi assign; // N, element -> node
    double beta = 1.0;
    Eigen::VectorXd g; // K, positive
    Eigen::MatrixXd H; // K x D
    Eigen::VectorXd r; // K, log length-scales
    Eigen::MatrixXd Y; // K x D cache, row k = g(k) * H.row(k)

    int n() const { return static_cast<int>(assign.size()); }
    int k() const { return static_cast<int>(g.size()); }
    int d() const { return static_cast<int>(H.cols()); }
    void refresh_y();
    void check_invariants() const;
};

struct Priors {
    StationaryKernelParams xi_g{1.0 / 3.0, 3.0};
    StationaryKernelParams xi_r{1.0 / 3.0, 3.0};
    double d_beta0 = 2.0;
    double s_beta0 = 0.0; // 0 = auto: 2*D (prior mean 1/D keeps beta^-1 off the floor)
    bool squared_lengthscale = false;

    double resolved_s_beta0(int d) const { return s_beta0 > 0.0 ? s_beta0 : 2.0 * d; }
};

struct ChainConfig {
    int iters = 10000;
    int burn_in = 5000;
    int stride = 5;
    std::uint64_t seed = 0;
    int checkpoint_every = 2500;  // sweeps; 0 disables periodic checkpoints
    std::string checkpoint_path;  // empty disables checkpointing entirely
    void validate() const;
};

/// Quantities fixed for the lifetime of a chain: the node set, priors, the
/// prior Gram matrices of g and r, and the pairwise squared node distances.
struct SamplerContext {
    NodeSet nodes;
    Priors priors;
    GramMatrix cg;
    Eigen::MatrixXd cg_inv;
    GramMatrix cr;
    Eigen::MatrixXd node_d2; // K x K squared distances

    mutable double ch_max_jitter = 0.0; // largest jitter any C_h needed so far

    static SamplerContext build(const NodeSet& nodes, const Priors& priors);
};

/// Posterior mixture responsibilities of one feature row over the K nodes,
/// computed with a log-sum-exp.
Eigen::VectorXd responsibilities(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 const LatentState& state);
Eigen::MatrixXd responsibilities_all(const Eigen::MatrixXd& X, const LatentState& state);

void sample_Z(const Eigen::MatrixXd& X, LatentState& state, Rng& rng);
void sample_beta(const Eigen::MatrixXd& X, LatentState& state, const Priors& priors, Rng& rng);
void sample_g(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx, Rng& rng);
void sample_H(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx, Rng& rng);

/// Raw non-stationary kernel matrix over the node set for log length-scales r.
Eigen::MatrixXd build_ch(const NodeSet& nodes, const Eigen::VectorXd& r);

/// Log conditional density of r (up to a constant):
///   -D/2 ln|C_h| - 1/2 sum_d h_d' C_h^{-1} h_d - 1/2 r' C_r^{-1} r.
double log_target_r(const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                    const SamplerContext& ctx);
Eigen::VectorXd log_target_r_grad(const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                                  const SamplerContext& ctx);

/// A differentiable scalar function of a K-vector, the target handed to the
/// Metropolis-Hastings machinery (injectable for validation).
struct ScalarField {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

struct MhOptions {
    int newton_max_iters = 20;
    double grad_tol = 1e-6;
    double hess_fd_step = 1e-4; // finite-difference step for the Hessian
    double eig_floor = 1e-6;    // flooring for -(Hessian) eigenvalues
    double box = 50.0;          // target truncated to |r_k| <= box
};

struct MhStep {
    bool accepted = false;
    bool ascent_failed = false;
};

/// Bounded Newton ascent with step halving; Hessians are central finite
/// differences of the gradient. Returns the reached point; sets *failed if
/// the field is non-finite at the start.
Eigen::VectorXd newton_ascend(Eigen::VectorXd r, const ScalarField& field, const MhOptions& opts,
                              bool* failed = nullptr);

/// One Metropolis-Hastings update with a Laplace proposal built at the local
/// maximum reached from the current point. On acceptance `r` is replaced.
MhStep mh_laplace_step(Eigen::VectorXd& r, const ScalarField& field, Rng& rng,
                       const MhOptions& opts = {});

MhStep sample_r(LatentState& state, const SamplerContext& ctx, Rng& rng,
                const MhOptions& opts = {});

ScalarField make_r_field(const Eigen::MatrixXd& H, const SamplerContext& ctx);

/// Complete-data log-likelihood of the current state (includes the K^-N
/// mixing term and Gaussian normalization).
double complete_loglik(const Eigen::MatrixXd& X, const LatentState& state);

/// Log of the joint density p(X, Z, beta, g, H, r) up to the positive-orthant
/// normalizer of the g prior (constant in the state).
double joint_log_density(const Eigen::MatrixXd& X, const LatentState& state,
                         const SamplerContext& ctx);

/// PCA-based initialization: nodes mapped through the top-L principal
/// components scaled to the per-component standard deviations.
LatentState initial_state(const Eigen::MatrixXd& X, const NodeSet& nodes);

struct TraceRow {
    int iter = 0;
    double loglik = 0.0;
    double beta = 0.0;
    int accept_r = 0;
};

struct PosteriorSummary {
    double beta_bar = 0.0;
    Eigen::VectorXd g_bar, r_bar;
    Eigen::MatrixXd h_bar;     // K x D
    Eigen::MatrixXd gamma_bar; // N x K averaged responsibilities
    Eigen::VectorXi z_map;     // per-element argmax of gamma_bar
    std::vector<TraceRow> trace;
    int recorded = 0;
    double accept_rate_r = 0.0;
    double max_jitter = 0.0;
};

/// Serializable chain snapshot; a chain resumed from it is bit-identical to
/// one that never stopped.
struct ChainCheckpoint {
    int version = 1;
    int next_iter = 1; // next sweep to execute, 1-based
    LatentState state;
    std::string rng_state;
    int recorded = 0;
    double sum_beta = 0.0;
    Eigen::VectorXd sum_g, sum_r;
    Eigen::MatrixXd sum_h, sum_gamma;
    std::vector<TraceRow> trace;
    long accept_count = 0;
};

void save_chain_checkpoint(const std::string& path, const ChainCheckpoint& cp);
ChainCheckpoint load_chain_checkpoint(const std::string& path);

/// Run the Gibbs/MH sweep Z, beta, g, H, r for `config.iters` sweeps,
/// recording post-burn-in states at the thinning stride and returning
/// ensemble averages. `init` overrides the PCA initialization.
PosteriorSummary run_chain(const Eigen::MatrixXd& X, const NodeSet& nodes, const Priors& priors,
                           const ChainConfig& config, const LatentState* init = nullptr);

/// Continue a checkpointed chain to completion.
PosteriorSummary resume_chain(const Eigen::MatrixXd& X, const NodeSet& nodes,
                              const Priors& priors, const ChainConfig& config,
                              ChainCheckpoint checkpoint);

void export_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

} // namespace ptg
