#include "ptg/evaluation.hpp"

#include "ptg/errors.hpp"
#include "ptg/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace ptg {

int Descriptor::index_of(const std::string& symbol) const {
    for (int i = 0; i < n(); ++i)
        if (symbols[i] == symbol) return i;
    return -1;
}

Descriptor descriptor_from_table(const PeriodicTable& table, const std::string& name) {
    Descriptor d;
    d.name = name;
    d.coords = table.element_coords();
    d.symbols.reserve(table.n());
    for (const auto& e : table.elements) d.symbols.push_back(e.symbol);
    return d;
}

namespace {

// group, period of elements 1..54 in the 18-column standard table
constexpr std::pair<int, int> kGroupPeriod[54] = {
    {1, 1},  {18, 1},                                                                // H He
    {1, 2},  {2, 2},  {13, 2}, {14, 2}, {15, 2}, {16, 2}, {17, 2}, {18, 2},          // Li..Ne
    {1, 3},  {2, 3},  {13, 3}, {14, 3}, {15, 3}, {16, 3}, {17, 3}, {18, 3},          // Na..Ar
    {1, 4},  {2, 4},  {3, 4},  {4, 4},  {5, 4},  {6, 4},  {7, 4},  {8, 4},  {9, 4},
    {10, 4}, {11, 4}, {12, 4}, {13, 4}, {14, 4}, {15, 4}, {16, 4}, {17, 4}, {18, 4}, // K..Kr
    {1, 5},  {2, 5},  {3, 5},  {4, 5},  {5, 5},  {6, 5},  {7, 5},  {8, 5},  {9, 5},
    {10, 5}, {11, 5}, {12, 5}, {13, 5}, {14, 5}, {15, 5}, {16, 5}, {17, 5}, {18, 5}, // Rb..Xe
};

} // namespace

Descriptor standard_table_descriptor(const ElementTable& table) {
    Descriptor d;
    d.name = "standard";
    d.coords.resize(table.n(), 2);
    for (int i = 0; i < table.n(); ++i) {
        const int z = table.elements[i].atomic_number;
        if (z < 1 || z > 54)
            throw InputError("standard_table_descriptor: atomic number " + std::to_string(z) +
                             " outside the built-in H..Xe map");
        auto [group, period] = kGroupPeriod[z - 1];
        d.coords(i, 0) = -1.0 + 2.0 * (group - 1) / 17.0;
        d.coords(i, 1) = -1.0 + 2.0 * (period - 1) / 4.0;
        d.symbols.push_back(table.elements[i].symbol);
    }
    return d;
}

Eigen::VectorXd phi(const Composition& comp, const Descriptor& descriptor) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(descriptor.l());
    for (size_t t = 0; t < comp.terms.size(); ++t) {
        int idx = descriptor.index_of(comp.terms[t].first);
        if (idx < 0)
            throw InputError("phi: element '" + comp.terms[t].first +
                             "' missing from descriptor '" + descriptor.name + "'");
        out += comp.weights[t] * descriptor.coords.row(idx).transpose();
    }
    return out;
}

Eigen::MatrixXd phi_features(const CompoundDataset& dataset, const Descriptor& descriptor) {
    Eigen::MatrixXd f(dataset.size(), descriptor.l());
    for (int i = 0; i < dataset.size(); ++i)
        f.row(i) = phi(dataset.records[i].composition, descriptor).transpose();
    return f;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x(nodes[node].feature) <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    return nodes[node].value;
}

double ForestModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(x);
    return acc / trees.size();
}

Eigen::VectorXd ForestModel::predict_all(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (int i = 0; i < x.rows(); ++i) out(i) = predict(x.row(i));
    return out;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const ForestHyperparams& params;
    int mtry;
    Rng rng;
    RegressionTree tree;

    int build(std::vector<int>& idx, int begin, int end, int depth) {
        const int count = end - begin;
        double sum = 0.0, sum2 = 0.0;
        for (int i = begin; i < end; ++i) {
            sum += y(idx[i]);
            sum2 += y(idx[i]) * y(idx[i]);
        }
        const double mean = sum / count;

        TreeNode node;
        node.value = mean;
        const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
        const double sse = std::max(0.0, sum2 - sum * sum / count);
        if (count < 2 * params.min_leaf || depth_capped || sse <= 1e-12) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size()) - 1;
        }

        // Random feature subset, then exhaustive threshold scan per feature.
        const int d = static_cast<int>(x.cols());
        std::vector<int> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < mtry && i < d; ++i) {
            int j = i + static_cast<int>(sample_uniform(rng) * (d - i));
            if (j >= d) j = d - 1;
            std::swap(feats[i], feats[j]);
        }

        int best_feat = -1;
        double best_thresh = 0.0, best_score = sse - 1e-12;
        std::vector<int> order(idx.begin() + begin, idx.begin() + end);
        for (int fi = 0; fi < mtry && fi < d; ++fi) {
            const int f = feats[fi];
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
            });
            double lsum = 0.0, lsum2 = 0.0, rsum = sum, rsum2 = sum2;
            for (int i = 0; i + 1 < count; ++i) {
                const double yi = y(order[i]);
                lsum += yi;
                lsum2 += yi * yi;
                rsum -= yi;
                rsum2 -= yi * yi;
                const int nl = i + 1, nr = count - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                if (x(order[i], f) == x(order[i + 1], f)) continue; // no gap to split in
                const double score = (lsum2 - lsum * lsum / nl) + (rsum2 - rsum * rsum / nr);
                if (score < best_score) {
                    best_score = score;
                    best_feat = f;
                    best_thresh = 0.5 * (x(order[i], f) + x(order[i + 1], f));
                }
            }
        }
        if (best_feat < 0) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size()) - 1;
        }

        auto mid = std::partition(idx.begin() + begin, idx.begin() + end,
                                  [&](int i) { return x(i, best_feat) <= best_thresh; });
        const int split = static_cast<int>(mid - idx.begin());
        if (split == begin || split == end) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size()) - 1;
        }

        node.feature = best_feat;
        node.threshold = best_thresh;
        tree.nodes.push_back(node);
        const int self = static_cast<int>(tree.nodes.size()) - 1;
        tree.nodes[self].left = build(idx, begin, split, depth + 1);
        tree.nodes[self].right = build(idx, split, end, depth + 1);
        return self;
    }
};

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const ForestHyperparams& params, int mtry, Rng rng) {
    const int m = static_cast<int>(x.rows());
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) {
        int j = static_cast<int>(sample_uniform(rng) * m); // bootstrap resample
        idx[i] = j >= m ? m - 1 : j;
    }
    TreeBuilder builder{x, y, params, mtry, std::move(rng), {}};
    builder.build(idx, 0, m, 0);
    return std::move(builder.tree);
}

} // namespace

ForestModel rf_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   const ForestHyperparams& params, std::uint64_t seed, int workers) {
    if (features.rows() != targets.size()) throw InputError("rf_fit: size mismatch");
    if (features.rows() < 2 * params.min_leaf)
        throw InputError("rf_fit: need at least 2*min_leaf samples");
    if (params.trees < 1) throw InputError("rf_fit: need at least one tree");

    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.train_min = targets.minCoeff();
    model.train_max = targets.maxCoeff();
    const int d = static_cast<int>(features.cols());
    const int mtry = params.max_features > 0
                         ? std::min(params.max_features, d)
                         : std::max(1, static_cast<int>(std::ceil(d / 3.0)));

    model.trees.resize(params.trees);
    const int nworkers = std::max(1, workers);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int t = next.fetch_add(1); t < params.trees; t = next.fetch_add(1))
            model.trees[t] = fit_tree(features, targets, params, mtry,
                                      make_rng(seed, static_cast<std::uint64_t>(t)));
    };
    if (nworkers == 1) {
        work();
    } else {
        std::vector<std::future<void>> futs;
        futs.reserve(nworkers);
        for (int w = 0; w < nworkers; ++w) futs.push_back(std::async(std::launch::async, work));
        for (auto& f : futs) f.get();
    }
    return model;
}

namespace {

/// Stratified-by-target-quantile fold ids: sort by target, then permute fold
/// labels within each consecutive block of `folds` samples.
std::vector<int> stratified_folds(const Eigen::VectorXd& targets, int folds, Rng& rng) {
    const int m = static_cast<int>(targets.size());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return targets(a) < targets(b) || (targets(a) == targets(b) && a < b);
    });
    std::vector<int> fold_of(m, 0);
    std::vector<int> labels(folds);
    for (int start = 0; start < m; start += folds) {
        std::iota(labels.begin(), labels.end(), 0);
        for (int i = folds - 1; i > 0; --i) {
            int j = static_cast<int>(sample_uniform(rng) * (i + 1));
            if (j > i) j = i;
            std::swap(labels[i], labels[j]);
        }
        for (int i = 0; i < folds && start + i < m; ++i) fold_of[order[start + i]] = labels[i];
    }
    return fold_of;
}

} // namespace

EvalReport cross_validate(const CompoundDataset& dataset, const Descriptor& descriptor,
                          const CvConfig& config) {
    const int m = dataset.size();
    if (m == 0) throw InputError("cross_validate: empty dataset");
    if (config.folds < 2) throw InputError("cross_validate: need at least 2 folds");
    if (m < config.folds) throw InputError("cross_validate: fewer samples than folds");

    Eigen::MatrixXd feats = phi_features(dataset, descriptor);
    Eigen::VectorXd targets(m);
    for (int i = 0; i < m; ++i) targets(i) = dataset.records[i].target;

    EvalReport report;
    report.descriptor_name = descriptor.name;
    report.folds = config.folds;
    report.repeats = config.repeats;
    report.per_compound_abs_err.assign(m, 0.0);

    for (int rep = 0; rep < config.repeats; ++rep) {
        Rng fold_rng = make_rng(config.seed, 1000 + static_cast<std::uint64_t>(rep));
        std::vector<int> fold_of = stratified_folds(targets, config.folds, fold_rng);
        report.fold_of.push_back(fold_of);

        double abs_sum = 0.0, sq_sum = 0.0;
        for (int fold = 0; fold < config.folds; ++fold) {
            std::vector<int> train, test;
            for (int i = 0; i < m; ++i) (fold_of[i] == fold ? test : train).push_back(i);

            Eigen::MatrixXd xtr(train.size(), feats.cols());
            Eigen::VectorXd ytr(train.size());
            for (size_t i = 0; i < train.size(); ++i) {
                xtr.row(static_cast<int>(i)) = feats.row(train[i]);
                ytr(static_cast<int>(i)) = targets(train[i]);
            }
            ForestModel model = rf_fit(
                xtr, ytr, config.forest,
                mix_seed(config.seed, 7000 + static_cast<std::uint64_t>(rep) * 100 + fold),
                config.workers);
            for (int i : test) {
                const double err = model.predict(feats.row(i)) - targets(i);
                abs_sum += std::abs(err);
                sq_sum += err * err;
                report.per_compound_abs_err[i] += std::abs(err) / config.repeats;
            }
        }
        report.mae_per_repeat.push_back(abs_sum / m);
        report.rmse_per_repeat.push_back(std::sqrt(sq_sum / m));
    }

    auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double acc = 0.0;
        for (double x : v) acc += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(acc / (v.size() - 1)) : 0.0;
    };
    mean_std(report.mae_per_repeat, report.mae_mean, report.mae_std);
    mean_std(report.rmse_per_repeat, report.rmse_mean, report.rmse_std);
    return report;
}

namespace {

std::vector<EnrichmentRow> enrich_rows(const std::vector<int>& subset,
                                       const CompoundDataset& background) {
    // Element incidence: an element counts once per compound containing it.
    std::map<std::string, int> bg_count, sub_count;
    for (const auto& rec : background.records) {
        std::set<std::string> seen;
        for (const auto& [sym, c] : rec.composition.terms) seen.insert(sym);
        for (const auto& s : seen) bg_count[s] += 1;
    }
    for (int i : subset) {
        std::set<std::string> seen;
        for (const auto& [sym, c] : background.records[i].composition.terms) seen.insert(sym);
        for (const auto& s : seen) sub_count[s] += 1;
    }
    const double bg_total = static_cast<double>(background.size());
    std::vector<EnrichmentRow> rows;
    for (const auto& [sym, bg] : bg_count) {
        EnrichmentRow row;
        row.symbol = sym;
        row.observed = sub_count.count(sym) ? sub_count[sym] : 0;
        row.expected = static_cast<double>(subset.size()) * bg / bg_total;
        row.ratio = row.expected > 0.0 ? row.observed / row.expected
                                       : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

EnrichmentTable enrichment(const EvalReport& report_a, const EvalReport& report_b,
                           const CompoundDataset& background, double low, double margin) {
    const size_t m = background.records.size();
    if (report_a.per_compound_abs_err.size() != m || report_b.per_compound_abs_err.size() != m)
        throw InputError("enrichment: reports do not cover the same compound set");

    EnrichmentTable table;
    for (size_t i = 0; i < m; ++i) {
        const double ea = report_a.per_compound_abs_err[i];
        const double eb = report_b.per_compound_abs_err[i];
        if (ea < low && eb - ea > margin) table.subset_a.push_back(static_cast<int>(i));
        if (eb < low && ea - eb > margin) table.subset_b.push_back(static_cast<int>(i));
    }
    table.rows_a = enrich_rows(table.subset_a, background);
    table.rows_b = enrich_rows(table.subset_b, background);
    return table;
}

} // namespace ptg
