#include "ptg/assignment.hpp"

#include "ptg/errors.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace ptg {

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    if (X.cols() != Y.cols()) throw InputError("cost_matrix: feature dimension mismatch");
    const int n = static_cast<int>(X.rows()), k = static_cast<int>(Y.rows());
    Eigen::VectorXd xn2 = X.rowwise().squaredNorm();
    Eigen::VectorXd yk2 = Y.rowwise().squaredNorm();
    Eigen::MatrixXd c = xn2.replicate(1, k) + yk2.transpose().replicate(n, 1) -
                        2.0 * X * Y.transpose();
    return c.cwiseMax(0.0); // clip the tiny negatives the expansion can produce
}

AssignResult solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (m < n)
        throw InputError("solve_assignment: infeasible, need at least as many nodes (" +
                         std::to_string(m) + ") as elements (" + std::to_string(n) + ")");
    if (!cost.allFinite()) throw InputError("solve_assignment: non-finite cost");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    AssignResult res;
    res.node_of.assign(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) res.node_of[p[j] - 1] = j - 1;
    for (int i = 0; i < n; ++i) {
        if (res.node_of[i] < 0) throw NumericError("solve_assignment: unassigned element");
        res.objective += cost(i, res.node_of[i]);
    }
    return res;
}

Eigen::MatrixXd PeriodicTable::element_coords() const {
    Eigen::MatrixXd c(n(), nodes.l());
    for (int i = 0; i < n(); ++i) c.row(i) = nodes.coords.row(node_of[i]);
    return c;
}

void PeriodicTable::check_invariants() const {
    if (static_cast<int>(node_of.size()) != n())
        throw NumericError("periodic table: assignment size mismatch");
    std::set<int> seen;
    for (int k : node_of) {
        if (k < 0 || k >= nodes.k()) throw NumericError("periodic table: node index out of range");
        if (!seen.insert(k).second)
            throw NumericError("periodic table: two elements share node " + std::to_string(k));
    }
}

namespace {

/// beta to its conditional mode (d_beta - 1)/s_beta, clamped positive.
void mode_beta(const Eigen::MatrixXd& X, LatentState& state, const Priors& priors) {
    const int n = static_cast<int>(X.rows()), d = static_cast<int>(X.cols());
    double resid = 0.0;
    for (int i = 0; i < n; ++i) resid += (X.row(i) - state.Y.row(state.assign(i))).squaredNorm();
    const double d_beta = priors.d_beta0 + 0.5 * n * d;
    const double s_beta = priors.resolved_s_beta0(d) + 0.5 * resid;
    state.beta = std::max((d_beta - 1.0) / s_beta, 1e-12);
}

/// Coordinate-wise mode of the positive-orthant truncated normal: repeated
/// sweeps of g_k = max(conditional mean, 0+) until stationary.
void mode_g(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx) {
    const int k = state.k();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, state.d());
    for (int i = 0; i < X.rows(); ++i) {
        counts(state.assign(i)) += 1.0;
        sums.row(state.assign(i)) += X.row(i);
    }
    Eigen::VectorXd hk2 = state.H.rowwise().squaredNorm();
    Eigen::MatrixXd prec = ctx.cg_inv;
    prec.diagonal() += state.beta * (counts.array() * hk2.array()).matrix();
    Eigen::VectorXd b(k);
    for (int kk = 0; kk < k; ++kk) b(kk) = state.beta * state.H.row(kk).dot(sums.row(kk));
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericError("fine_tune: singular g precision");
    Eigen::VectorXd mu = llt.solve(b);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double max_change = 0.0;
        for (int kk = 0; kk < k; ++kk) {
            double dot = prec.row(kk).dot(state.g - mu) - prec(kk, kk) * (state.g(kk) - mu(kk));
            double cond_mean = mu(kk) - dot / prec(kk, kk);
            double nv = std::max(cond_mean, 1e-12);
            max_change = std::max(max_change, std::abs(nv - state.g(kk)));
            state.g(kk) = nv;
        }
        if (max_change < 1e-12) break;
    }
    state.refresh_y();
}

/// H columns to their conditional posterior means.
void mode_H(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx) {
    const int k = state.k();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, state.d());
    for (int i = 0; i < X.rows(); ++i) {
        counts(state.assign(i)) += 1.0;
        sums.row(state.assign(i)) += X.row(i);
    }
    GramMatrix ch = gram_from_matrix(build_ch(ctx.nodes, state.r));
    ctx.ch_max_jitter = std::max(ctx.ch_max_jitter, ch.jitter);
    Eigen::MatrixXd prec = ch.inverse();
    prec.diagonal() += state.beta * (counts.array() * state.g.array().square()).matrix();
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericError("fine_tune: singular H precision");
    state.H = llt.solve(state.beta * (state.g.asDiagonal() * sums));
    state.refresh_y();
}

} // namespace

FineTuneResult fine_tune(const Eigen::MatrixXd& X, const NodeSet& fine_nodes,
                         const LatentState& interpolated, const Priors& priors, int iters) {
    if (fine_nodes.k() < X.rows())
        throw InputError("fine_tune: expanded layout has fewer nodes than elements");
    if (interpolated.k() != fine_nodes.k() || interpolated.d() != X.cols())
        throw InputError("fine_tune: state dimensions do not match the expanded node set");

    SamplerContext ctx = SamplerContext::build(fine_nodes, priors);
    LatentState state = interpolated;
    state.refresh_y();

    // The assignment the interpolated state implies; the T'=0 answer.
    AssignResult a0 = solve_assignment(cost_matrix(X, state.Y));
    state.assign = Eigen::Map<const Eigen::VectorXi>(a0.node_of.data(),
                                                     static_cast<int>(a0.node_of.size()));

    FineTuneResult best;
    best.state = state;
    best.node_of = a0.node_of;
    best.best_joint = joint_log_density(X, state, ctx);
    best.best_iter = 0;
    best.joint_trace.push_back(best.best_joint);

    for (int t = 1; t <= iters; ++t) {
        AssignResult at = solve_assignment(cost_matrix(X, state.Y));
        state.assign = Eigen::Map<const Eigen::VectorXi>(at.node_of.data(),
                                                         static_cast<int>(at.node_of.size()));
        mode_beta(X, state, priors);
        mode_g(X, state, ctx);
        mode_H(X, state, ctx);

        ScalarField field = make_r_field(state.H, ctx);
        bool ascent_failed = false;
        Eigen::VectorXd r_hat = newton_ascend(state.r, field, MhOptions{}, &ascent_failed);
        if (!ascent_failed) state.r = r_hat; // on failure keep the previous r and continue

        const double jl = joint_log_density(X, state, ctx);
        best.joint_trace.push_back(jl);
        if (jl > best.best_joint) {
            best.best_joint = jl;
            best.best_iter = t;
            best.state = state;
            best.node_of.assign(state.assign.data(), state.assign.data() + state.assign.size());
        }
    }
    return best;
}

} // namespace ptg
