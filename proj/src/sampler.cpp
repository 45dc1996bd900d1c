#include "ptg/sampler.hpp"

#include "ptg/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

namespace ptg {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112; // ln(2*pi)
constexpr double kGFloor = 1e-12;
} // namespace

void LatentState::refresh_y() {
    Y = g.asDiagonal() * H;
}

void LatentState::check_invariants() const {
    if (assign.size() > 0 && (assign.minCoeff() < 0 || assign.maxCoeff() >= k()))
        throw NumericError("latent state: assignment index out of range");
    if (!(beta > 0.0)) throw NumericError("latent state: beta must be positive");
    if ((g.array() <= 0.0).any()) throw NumericError("latent state: g must be positive");
    if (Y.rows() != H.rows() || Y.cols() != H.cols())
        throw NumericError("latent state: Y cache shape mismatch");
    for (int kk = 0; kk < k(); ++kk)
        if ((Y.row(kk) - g(kk) * H.row(kk)).cwiseAbs().maxCoeff() > 1e-12)
            throw NumericError("latent state: Y cache out of sync");
}

void ChainConfig::validate() const {
    if (iters < 1) throw InputError("chain: iters must be >= 1");
    if (burn_in < 0 || burn_in >= iters) throw InputError("chain: need burn_in < iters");
    if (stride < 1) throw InputError("chain: stride must be >= 1");
}

SamplerContext SamplerContext::build(const NodeSet& nodes, const Priors& priors) {
    SamplerContext ctx;
    ctx.nodes = nodes;
    ctx.priors = priors;
    auto kg = [&](const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) {
        return kernel_g(a, b, priors.xi_g, priors.squared_lengthscale);
    };
    auto kr = [&](const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) {
        return kernel_g(a, b, priors.xi_r, priors.squared_lengthscale);
    };
    ctx.cg = gram(nodes.coords, kg);
    ctx.cg_inv = ctx.cg.inverse();
    ctx.cr = gram(nodes.coords, kr);
    const int k = nodes.k();
    ctx.node_d2.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            ctx.node_d2(i, j) = (nodes.coords.row(i) - nodes.coords.row(j)).squaredNorm();
    return ctx;
}

Eigen::VectorXd responsibilities(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 const LatentState& state) {
    if (!x.allFinite()) throw NumericError("responsibilities: non-finite feature row");
    const int k = state.k();
    Eigen::VectorXd logw(k);
    for (int kk = 0; kk < k; ++kk)
        logw(kk) = -0.5 * state.beta * (x - state.Y.row(kk)).squaredNorm();
    const double m = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - m).exp();
    return w / w.sum();
}

Eigen::MatrixXd responsibilities_all(const Eigen::MatrixXd& X, const LatentState& state) {
    if (!X.allFinite()) throw NumericError("responsibilities: non-finite feature values");
    const int n = static_cast<int>(X.rows()), k = state.k();
    // -beta/2 * ||x_n - y_k||^2 via the expanded square
    Eigen::VectorXd xn2 = X.rowwise().squaredNorm();
    Eigen::VectorXd yk2 = state.Y.rowwise().squaredNorm();
    Eigen::MatrixXd logw =
        (-0.5 * state.beta) *
        ((xn2.replicate(1, k) + yk2.transpose().replicate(n, 1) - 2.0 * X * state.Y.transpose()));
    Eigen::MatrixXd gamma(n, k);
    for (int i = 0; i < n; ++i) {
        const double m = logw.row(i).maxCoeff();
        Eigen::ArrayXd w = (logw.row(i).array() - m).exp();
        gamma.row(i) = (w / w.sum()).matrix();
    }
    return gamma;
}

void sample_Z(const Eigen::MatrixXd& X, LatentState& state, Rng& rng) {
    Eigen::MatrixXd gamma = responsibilities_all(X, state);
    for (int i = 0; i < gamma.rows(); ++i)
        state.assign(i) = sample_categorical(rng, gamma.row(i).data(), state.k());
}

namespace {

double residual_sum(const Eigen::MatrixXd& X, const LatentState& state) {
    double acc = 0.0;
    for (int i = 0; i < X.rows(); ++i) acc += (X.row(i) - state.Y.row(state.assign(i))).squaredNorm();
    return acc;
}

/// Per-node counts and feature sums under the current assignment.
void scatter(const Eigen::MatrixXd& X, const LatentState& state, Eigen::VectorXd& counts,
             Eigen::MatrixXd& sums) {
    counts = Eigen::VectorXd::Zero(state.k());
    sums = Eigen::MatrixXd::Zero(state.k(), state.d());
    for (int i = 0; i < X.rows(); ++i) {
        counts(state.assign(i)) += 1.0;
        sums.row(state.assign(i)) += X.row(i);
    }
}

} // namespace

void sample_beta(const Eigen::MatrixXd& X, LatentState& state, const Priors& priors, Rng& rng) {
    const int n = static_cast<int>(X.rows()), d = static_cast<int>(X.cols());
    const double resid = residual_sum(X, state);
    if (!std::isfinite(resid)) throw NumericError("sample_beta: non-finite residual sum");
    const double d_beta = priors.d_beta0 + 0.5 * n * d;
    const double s_beta = priors.resolved_s_beta0(d) + 0.5 * resid;
    state.beta = sample_gamma(rng, d_beta, s_beta);
}

void sample_g(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx, Rng& rng) {
    const int k = state.k();
    Eigen::VectorXd counts;
    Eigen::MatrixXd sums;
    scatter(X, state, counts, sums);

    // Precision = beta * diag(N_k ||h_k||^2) + C_g^{-1}; linear term beta * h_k . s_k.
    Eigen::VectorXd hk2 = state.H.rowwise().squaredNorm();
    Eigen::MatrixXd prec = ctx.cg_inv;
    prec.diagonal() += state.beta * (counts.array() * hk2.array()).matrix();
    Eigen::VectorXd b(k);
    for (int kk = 0; kk < k; ++kk) b(kk) = state.beta * state.H.row(kk).dot(sums.row(kk));

    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericError("sample_g: singular posterior precision");
    Eigen::VectorXd mu = llt.solve(b);

    // One coordinate-wise Gibbs sweep of the positive-orthant truncated normal.
    for (int kk = 0; kk < k; ++kk) {
        double pkk = prec(kk, kk);
        double dot = prec.row(kk).dot((state.g - mu)) - pkk * (state.g(kk) - mu(kk));
        double cond_mean = mu(kk) - dot / pkk;
        double cond_sd = std::sqrt(1.0 / pkk);
        double v = sample_truncnorm_lower(rng, cond_mean, cond_sd, 0.0);
        state.g(kk) = v > kGFloor ? v : kGFloor;
    }
    state.refresh_y();
}

Eigen::MatrixXd build_ch(const NodeSet& nodes, const Eigen::VectorXd& r) {
    const int k = nodes.k(), L = nodes.l();
    Eigen::VectorXd l = r.array().min(50.0).max(-50.0).exp();
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i) {
        m(i, i) = 1.0;
        for (int j = i + 1; j < k; ++j) {
            double v = kernel_h(nodes.coords.row(i), nodes.coords.row(j), l(i), l(j), L);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

void sample_H(const Eigen::MatrixXd& X, LatentState& state, const SamplerContext& ctx, Rng& rng) {
    const int k = state.k(), d = state.d();
    Eigen::VectorXd counts;
    Eigen::MatrixXd sums;
    scatter(X, state, counts, sums);

    GramMatrix ch = gram_from_matrix(build_ch(ctx.nodes, state.r));
    ctx.ch_max_jitter = std::max(ctx.ch_max_jitter, ch.jitter);
    Eigen::MatrixXd prec = ch.inverse();
    prec.diagonal() += state.beta * (counts.array() * state.g.array().square()).matrix();

    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) throw NumericError("sample_H: singular posterior precision");

    // Shared factorization across the D independent column draws.
    Eigen::MatrixXd mean = llt.solve(state.beta * (state.g.asDiagonal() * sums));
    Eigen::MatrixXd z(k, d);
    for (int dd = 0; dd < d; ++dd)
        for (int kk = 0; kk < k; ++kk) z(kk, dd) = sample_normal(rng);
    // x = mu + U^{-1} z has covariance (U'U)^{-1} = prec^{-1}
    state.H = mean + llt.matrixU().solve(z);
    state.refresh_y();
}

namespace {

struct RTargetParts {
    double value;
    Eigen::VectorXd grad;
};

RTargetParts eval_r_target(const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                           const SamplerContext& ctx, bool want_grad) {
    const int k = static_cast<int>(r.size());
    const int d = static_cast<int>(H.cols());
    const int L = ctx.nodes.l();

    GramMatrix ch = gram_from_matrix(build_ch(ctx.nodes, r));
    ctx.ch_max_jitter = std::max(ctx.ch_max_jitter, ch.jitter);

    Eigen::MatrixXd w_half = ch.llt.matrixL().solve(H); // L^{-1} H
    const double quad_h = w_half.squaredNorm();
    Eigen::VectorXd cr_inv_r = ctx.cr.llt.solve(r);
    const double quad_r = r.dot(cr_inv_r);

    RTargetParts out;
    out.value = -0.5 * d * ch.log_det() - 0.5 * quad_h - 0.5 * quad_r;
    if (!want_grad) return out;

    Eigen::MatrixXd a = ch.inverse();       // C_h^{-1}
    Eigen::MatrixXd w = ch.llt.solve(H);    // C_h^{-1} H
    Eigen::MatrixXd m = w * w.transpose();  // K x K

    Eigen::VectorXd l = r.array().min(50.0).max(-50.0).exp();
    Eigen::VectorXd l2 = l.array().square();
    out.grad.resize(k);
    for (int mm = 0; mm < k; ++mm) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == mm) continue;
            const double aa = l2(mm) + l2(j);
            const double c = ch.m(mm, j); // off-diagonal: jitter-free kernel value
            const double factor =
                0.5 * L * (1.0 - 2.0 * l2(mm) / aa) + 2.0 * l2(mm) * ctx.node_d2(mm, j) / (aa * aa);
            const double dc = c * factor;
            acc += dc * (m(mm, j) - d * a(mm, j));
        }
        out.grad(mm) = acc - cr_inv_r(mm);
    }
    return out;
}

Eigen::MatrixXd fd_hessian(const ScalarField& field, const Eigen::VectorXd& r, double step) {
    const int k = static_cast<int>(r.size());
    Eigen::MatrixXd h(k, k);
    Eigen::VectorXd rp = r, rm = r;
    for (int i = 0; i < k; ++i) {
        rp(i) = r(i) + step;
        rm(i) = r(i) - step;
        h.col(i) = (field.grad(rp) - field.grad(rm)) / (2.0 * step);
        rp(i) = r(i);
        rm(i) = r(i);
    }
    return 0.5 * (h + h.transpose());
}

double log_mvn(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
               const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
               const Eigen::VectorXd& floored_prec_evals) {
    // Covariance = Q diag(1/lambda) Q'; lambda are the floored precision eigenvalues.
    Eigen::VectorXd y = es.eigenvectors().transpose() * (x - mean);
    double quad = (y.array().square() * floored_prec_evals.array()).sum();
    double log_det_cov = -floored_prec_evals.array().log().sum();
    return -0.5 * quad - 0.5 * log_det_cov - 0.5 * x.size() * kLog2Pi;
}

} // namespace

double log_target_r(const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                    const SamplerContext& ctx) {
    return eval_r_target(r, H, ctx, false).value;
}

Eigen::VectorXd log_target_r_grad(const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                                  const SamplerContext& ctx) {
    return eval_r_target(r, H, ctx, true).grad;
}

ScalarField make_r_field(const Eigen::MatrixXd& H, const SamplerContext& ctx) {
    ScalarField f;
    f.value = [&H, &ctx](const Eigen::VectorXd& r) { return eval_r_target(r, H, ctx, false).value; };
    f.grad = [&H, &ctx](const Eigen::VectorXd& r) { return eval_r_target(r, H, ctx, true).grad; };
    return f;
}

Eigen::VectorXd newton_ascend(Eigen::VectorXd r, const ScalarField& field, const MhOptions& opts,
                              bool* failed) {
    if (failed) *failed = false;
    double fr = field.value(r);
    if (!std::isfinite(fr)) {
        if (failed) *failed = true;
        return r;
    }
    for (int it = 0; it < opts.newton_max_iters; ++it) {
        Eigen::VectorXd grad = field.grad(r);
        if (!grad.allFinite()) {
            if (failed) *failed = true;
            return r;
        }
        if (grad.cwiseAbs().maxCoeff() < opts.grad_tol) break;

        Eigen::MatrixXd hess = fd_hessian(field, r, opts.hess_fd_step);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hess);
        if (es.info() != Eigen::Success) {
            if (failed) *failed = true;
            return r;
        }
        Eigen::VectorXd evals = es.eigenvalues().cwiseMax(opts.eig_floor);
        Eigen::VectorXd step =
            es.eigenvectors() *
            ((es.eigenvectors().transpose() * grad).array() / evals.array()).matrix();

        bool improved = false;
        for (double alpha = 1.0; alpha >= 1e-8; alpha *= 0.5) {
            Eigen::VectorXd cand =
                (r + alpha * step).cwiseMin(opts.box).cwiseMax(-opts.box);
            double fc = field.value(cand);
            if (std::isfinite(fc) && fc > fr) {
                r = cand;
                fr = fc;
                improved = true;
                break;
            }
        }
        if (!improved) break; // at (numerical) local maximum
    }
    return r;
}

MhStep mh_laplace_step(Eigen::VectorXd& r, const ScalarField& field, Rng& rng,
                       const MhOptions& opts) {
    MhStep res;
    const int k = static_cast<int>(r.size());

    bool ascent_failed = false;
    Eigen::VectorXd r_hat = newton_ascend(r, field, opts, &ascent_failed);
    if (ascent_failed) {
        res.ascent_failed = true;
        return res;
    }

    Eigen::VectorXd grad_hat = field.grad(r_hat);
    Eigen::MatrixXd hess = fd_hessian(field, r_hat, opts.hess_fd_step);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hess);
    if (es.info() != Eigen::Success || !grad_hat.allFinite()) {
        res.ascent_failed = true;
        return res;
    }
    Eigen::VectorXd prec_evals = es.eigenvalues().cwiseMax(opts.eig_floor);

    // m = r_hat + V grad, V = Q diag(1/lambda) Q'
    Eigen::VectorXd mean =
        r_hat + es.eigenvectors() *
                    ((es.eigenvectors().transpose() * grad_hat).array() / prec_evals.array())
                        .matrix();

    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) z(i) = sample_normal(rng);
    Eigen::VectorXd cand =
        mean + es.eigenvectors() * (z.array() / prec_evals.array().sqrt()).matrix();

    const double u = sample_uniform(rng);
    if (cand.cwiseAbs().maxCoeff() > opts.box) return res; // outside the truncation box

    const double s_cand = field.value(cand);
    const double s_cur = field.value(r);
    if (!std::isfinite(s_cand)) return res;
    const double logq_cand = log_mvn(cand, mean, es, prec_evals);
    const double logq_cur = log_mvn(r, mean, es, prec_evals);
    const double log_ratio = s_cand - s_cur + logq_cur - logq_cand;

    if (std::log(u) < log_ratio) {
        r = cand;
        res.accepted = true;
    }
    return res;
}

MhStep sample_r(LatentState& state, const SamplerContext& ctx, Rng& rng, const MhOptions& opts) {
    ScalarField field = make_r_field(state.H, ctx);
    return mh_laplace_step(state.r, field, rng, opts);
}

double complete_loglik(const Eigen::MatrixXd& X, const LatentState& state) {
    const int n = static_cast<int>(X.rows()), d = static_cast<int>(X.cols());
    const double resid = residual_sum(X, state);
    return -n * std::log(static_cast<double>(state.k())) +
           0.5 * n * d * (std::log(state.beta) - kLog2Pi) - 0.5 * state.beta * resid;
}

double joint_log_density(const Eigen::MatrixXd& X, const LatentState& state,
                         const SamplerContext& ctx) {
    const int d = state.d(), k = state.k();
    const double d0 = ctx.priors.d_beta0;
    const double s0 = ctx.priors.resolved_s_beta0(d);

    double lp = complete_loglik(X, state);
    lp += d0 * std::log(s0) - std::lgamma(d0) + (d0 - 1.0) * std::log(state.beta) -
          s0 * state.beta;
    lp += -0.5 * state.g.dot(ctx.cg.llt.solve(state.g)) - 0.5 * ctx.cg.log_det() -
          0.5 * k * kLog2Pi;

    GramMatrix ch = gram_from_matrix(build_ch(ctx.nodes, state.r));
    Eigen::MatrixXd w_half = ch.llt.matrixL().solve(state.H);
    lp += -0.5 * w_half.squaredNorm() - 0.5 * d * ch.log_det() - 0.5 * k * d * kLog2Pi;

    lp += -0.5 * state.r.dot(ctx.cr.llt.solve(state.r)) - 0.5 * ctx.cr.log_det() -
          0.5 * k * kLog2Pi;
    return lp;
}

LatentState initial_state(const Eigen::MatrixXd& X, const NodeSet& nodes) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    const int L = nodes.l();
    if (L > std::min(n, d))
        throw InputError("initial_state: latent dimension exceeds the data rank");

    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd xc = X.rowwise() - mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinV);
    Eigen::MatrixXd v = svd.matrixV().leftCols(L);
    Eigen::VectorXd sigma = svd.singularValues().head(L) / std::sqrt(static_cast<double>(n));

    LatentState st;
    st.Y = nodes.coords * sigma.asDiagonal() * v.transpose();
    st.Y.rowwise() += mean;
    st.g = Eigen::VectorXd::Ones(nodes.k());
    st.H = st.Y;
    st.r = Eigen::VectorXd::Zero(nodes.k());

    st.assign.resize(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = (X.row(i) - st.Y.row(0)).squaredNorm();
        for (int kk = 1; kk < nodes.k(); ++kk) {
            double dd = (X.row(i) - st.Y.row(kk)).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = kk;
            }
        }
        st.assign(i) = best;
        acc += bd;
    }
    const double msd = acc / n;
    st.beta = msd > 0.0 ? d / msd : 1.0;
    st.check_invariants();
    return st;
}

namespace {

PosteriorSummary finish_summary(const Eigen::MatrixXd& X, const ChainCheckpoint& cp,
                                const SamplerContext& ctx, int total_iters) {
    if (cp.recorded == 0) throw NumericError("run_chain: no samples recorded");
    PosteriorSummary s;
    const double c = static_cast<double>(cp.recorded);
    s.beta_bar = cp.sum_beta / c;
    s.g_bar = cp.sum_g / c;
    s.r_bar = cp.sum_r / c;
    s.h_bar = cp.sum_h / c;
    s.gamma_bar = cp.sum_gamma / c;
    s.z_map.resize(s.gamma_bar.rows());
    for (int i = 0; i < s.gamma_bar.rows(); ++i) {
        int best = 0;
        s.gamma_bar.row(i).maxCoeff(&best);
        s.z_map(i) = best;
    }
    s.trace = cp.trace;
    s.recorded = cp.recorded;
    s.accept_rate_r = static_cast<double>(cp.accept_count) / total_iters;
    s.max_jitter = std::max({ctx.cg.jitter, ctx.cr.jitter, ctx.ch_max_jitter});
    (void)X;
    return s;
}

} // namespace

PosteriorSummary resume_chain(const Eigen::MatrixXd& X, const NodeSet& nodes,
                              const Priors& priors, const ChainConfig& config,
                              ChainCheckpoint cp) {
    config.validate();
    if (cp.state.k() != nodes.k() || cp.state.d() != X.cols() || cp.state.n() != X.rows())
        throw InputError("resume_chain: checkpoint does not match data/nodes");

    SamplerContext ctx = SamplerContext::build(nodes, priors);
    Rng rng = rng_state_from_string(cp.rng_state);
    LatentState& st = cp.state;

    for (int t = cp.next_iter; t <= config.iters; ++t) {
        try {
            sample_Z(X, st, rng);
            sample_beta(X, st, priors, rng);
            sample_g(X, st, ctx, rng);
            sample_H(X, st, ctx, rng);
            MhStep mh = sample_r(st, ctx, rng);
            cp.accept_count += mh.accepted ? 1 : 0;

            if (t > config.burn_in && (t - config.burn_in - 1) % config.stride == 0) {
                cp.recorded += 1;
                cp.sum_beta += st.beta;
                cp.sum_g += st.g;
                cp.sum_r += st.r;
                cp.sum_h += st.H;
                cp.sum_gamma += responsibilities_all(X, st);
                cp.trace.push_back({t, complete_loglik(X, st), st.beta, mh.accepted ? 1 : 0});
            }
        } catch (const NumericError& e) {
            cp.next_iter = t; // retry this sweep on resume
            if (!config.checkpoint_path.empty()) save_chain_checkpoint(config.checkpoint_path, cp);
            throw NumericError("chain failed at iteration " + std::to_string(t) + ": " + e.what());
        }
        cp.next_iter = t + 1;
        if (!config.checkpoint_path.empty() && config.checkpoint_every > 0 &&
            t % config.checkpoint_every == 0 && t < config.iters)
            save_chain_checkpoint(config.checkpoint_path, cp);
    }
    st.check_invariants();

    PosteriorSummary s = finish_summary(X, cp, ctx, config.iters);
    if (!config.checkpoint_path.empty()) save_chain_checkpoint(config.checkpoint_path, cp);
    return s;
}

PosteriorSummary run_chain(const Eigen::MatrixXd& X, const NodeSet& nodes, const Priors& priors,
                           const ChainConfig& config, const LatentState* init) {
    config.validate();
    if (!X.allFinite()) throw InputError("run_chain: non-finite feature values");

    ChainCheckpoint cp;
    cp.next_iter = 1;
    cp.state = init ? *init : initial_state(X, nodes);
    cp.state.check_invariants();
    Rng rng = make_rng(config.seed);
    cp.rng_state = rng_state_to_string(rng);
    cp.sum_g = Eigen::VectorXd::Zero(nodes.k());
    cp.sum_r = Eigen::VectorXd::Zero(nodes.k());
    cp.sum_h = Eigen::MatrixXd::Zero(nodes.k(), X.cols());
    cp.sum_gamma = Eigen::MatrixXd::Zero(X.rows(), nodes.k());
    return resume_chain(X, nodes, priors, config, std::move(cp));
}

} // namespace ptg
