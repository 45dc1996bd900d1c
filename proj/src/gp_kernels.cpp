#include "ptg/gp_kernels.hpp"

#include "ptg/errors.hpp"

#include <cmath>

namespace ptg {

double kernel_g(const Eigen::Ref<const Eigen::RowVectorXd>& ui,
                const Eigen::Ref<const Eigen::RowVectorXd>& uj,
                const StationaryKernelParams& params, bool squared_lengthscale) {
    if (ui.size() != uj.size()) throw InputError("kernel_g: dimension mismatch");
    if (!(params.variance > 0.0) || !(params.length_scale > 0.0))
        throw InputError("kernel_g: hyperparameters must be positive");
    const double d2 = (ui - uj).squaredNorm();
    const double denom = squared_lengthscale ? 2.0 * params.length_scale * params.length_scale
                                             : 2.0 * params.length_scale;
    return params.variance * std::exp(-d2 / denom);
}

double kernel_h(const Eigen::Ref<const Eigen::RowVectorXd>& ui,
                const Eigen::Ref<const Eigen::RowVectorXd>& uj, double li, double lj, int L) {
    if (ui.size() != uj.size()) throw InputError("kernel_h: dimension mismatch");
    if (!(li > 0.0) || !(lj > 0.0)) throw InputError("kernel_h: length-scales must be positive");
    const double a = li * li + lj * lj;
    const double d2 = (ui - uj).squaredNorm();
    const double prefactor = std::pow(2.0 * li * lj / a, 0.5 * L);
    return prefactor * std::exp(-d2 / a);
}

double GramMatrix::log_det() const {
    double ld = 0.0;
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < L.rows(); ++i) ld += 2.0 * std::log(L(i, i));
    return ld;
}

Eigen::MatrixXd GramMatrix::inverse() const {
    return llt.solve(Eigen::MatrixXd::Identity(k(), k()));
}

GramMatrix gram_from_matrix(Eigen::MatrixXd m, JitterPolicy policy) {
    const int k = static_cast<int>(m.rows());
    GramMatrix g;
    double mean_diag = m.diagonal().mean();
    if (!(mean_diag > 0.0)) mean_diag = 1.0;

    // Try raw first, then escalate jitter.
    g.llt.compute(m);
    if (g.llt.info() == Eigen::Success) {
        g.m = std::move(m);
        g.jitter = 0.0;
        return g;
    }
    for (double rel = policy.start_rel; rel <= policy.max_rel * (1.0 + 1e-12);
         rel *= policy.factor) {
        double jitter = rel * mean_diag;
        Eigen::MatrixXd mj = m + jitter * Eigen::MatrixXd::Identity(k, k);
        g.llt.compute(mj);
        if (g.llt.info() == Eigen::Success) {
            g.m = std::move(mj);
            g.jitter = jitter;
            return g;
        }
    }
    throw NumericError("gram: kernel matrix singular even at maximum jitter");
}

GramMatrix gram(const Eigen::MatrixXd& points, const PairKernel& kernel, JitterPolicy policy) {
    const int k = static_cast<int>(points.rows());
    if (k < 1) throw InputError("gram: need at least one point");
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i) {
        m(i, i) = kernel(points.row(i), points.row(i));
        for (int j = i + 1; j < k; ++j) {
            double v = kernel(points.row(i), points.row(j));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return gram_from_matrix(std::move(m), policy);
}

Eigen::VectorXd gp_interpolate(const Eigen::MatrixXd& train_points,
                               const Eigen::VectorXd& train_values, const PairKernel& kernel,
                               const Eigen::MatrixXd& query_points, JitterPolicy policy) {
    if (train_points.rows() != train_values.size())
        throw InputError("gp_interpolate: training size mismatch");
    GramMatrix g = gram(train_points, kernel, policy);
    Eigen::VectorXd alpha = g.llt.solve(train_values);
    Eigen::VectorXd out(query_points.rows());
    for (int q = 0; q < query_points.rows(); ++q) {
        double acc = 0.0;
        for (int t = 0; t < train_points.rows(); ++t)
            acc += kernel(query_points.row(q), train_points.row(t)) * alpha(t);
        out(q) = acc;
    }
    return out;
}

Eigen::MatrixXd gp_interpolate_columns(const GramMatrix& train_gram,
                                       const Eigen::MatrixXd& train_values,
                                       const Eigen::MatrixXd& cross) {
    if (train_gram.k() != train_values.rows() || cross.cols() != train_values.rows())
        throw InputError("gp_interpolate_columns: size mismatch");
    return cross * train_gram.llt.solve(train_values);
}

} // namespace ptg
