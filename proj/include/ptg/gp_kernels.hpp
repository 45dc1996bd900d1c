#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>

namespace ptg {

/// Hyperparameters of the stationary squared-exponential-family kernels.
struct StationaryKernelParams {
    double variance = 1.0 / 3.0;
    double length_scale = 3.0;
};

/// Stationary covariance: variance * exp(-||ui-uj||^2 / (2*l)).
/// The length-scale enters the denominator un-squared by default;
/// `squared_lengthscale` switches to the conventional 2*l^2 form.
double kernel_g(const Eigen::Ref<const Eigen::RowVectorXd>& ui,
                const Eigen::Ref<const Eigen::RowVectorXd>& uj,
                const StationaryKernelParams& params, bool squared_lengthscale = false);

/// Non-stationary covariance with per-point length-scales li, lj:
///   {2*li*lj/(li^2+lj^2)}^(L/2) * exp(-||ui-uj||^2/(li^2+lj^2)).
/// Unit variance on the diagonal; reduces to the squared exponential with
/// scale l when li == lj == l.
double kernel_h(const Eigen::Ref<const Eigen::RowVectorXd>& ui,
                const Eigen::Ref<const Eigen::RowVectorXd>& uj, double li, double lj, int L);

struct JitterPolicy {
    double start_rel = 1e-10; // of the mean diagonal
    double max_rel = 1e-4;
    double factor = 10.0;
};

/// A kernel Gram matrix together with the diagonal jitter that was needed to
/// make its Cholesky factorization succeed. `llt` factors `m` (which already
/// includes the jitter).
struct GramMatrix {
    Eigen::MatrixXd m;
    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;

    int k() const { return static_cast<int>(m.rows()); }
    double log_det() const; // of the jittered matrix
    Eigen::MatrixXd inverse() const;
};

using PairKernel = std::function<double(const Eigen::Ref<const Eigen::RowVectorXd>&,
                                        const Eigen::Ref<const Eigen::RowVectorXd>&)>;

/// Assemble the symmetric Gram matrix of `kernel` over `points` (rows) and
/// factor it, escalating diagonal jitter per `policy` until the Cholesky
/// succeeds. Throws NumericError if the matrix is still singular at the cap.
GramMatrix gram(const Eigen::MatrixXd& points, const PairKernel& kernel, JitterPolicy policy = {});

/// Factor an externally assembled symmetric matrix under the same policy.
GramMatrix gram_from_matrix(Eigen::MatrixXd m, JitterPolicy policy = {});

/// Noise-free GP regression posterior mean at `query_points`:
///   k_*' (C + jitter I)^{-1} values.
Eigen::VectorXd gp_interpolate(const Eigen::MatrixXd& train_points,
                               const Eigen::VectorXd& train_values, const PairKernel& kernel,
                               const Eigen::MatrixXd& query_points, JitterPolicy policy = {});

/// Column-wise posterior means sharing one factorization: `cross` holds
/// k(query_i, train_j). Returns Q x D for D value columns.
Eigen::MatrixXd gp_interpolate_columns(const GramMatrix& train_gram,
                                       const Eigen::MatrixXd& train_values,
                                       const Eigen::MatrixXd& cross);

} // namespace ptg
