#include "ptg/pipeline.hpp"

#include "ptg/csv.hpp"
#include "ptg/errors.hpp"

#include "json_eigen.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace ptg {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string restart_tag(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    return buf;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write: " + path);
    f << text;
    if (!f) throw InputError("write failed: " + path);
}

} // namespace

LatentState interpolate_state(const PosteriorSummary& coarse, const NodeSet& coarse_nodes,
                              const NodeSet& fine_nodes, const Priors& priors) {
    const int L = coarse_nodes.l();
    if (fine_nodes.l() != L) throw InputError("interpolate_state: latent dimension mismatch");

    auto kr = [&](const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) {
        return kernel_g(a, b, priors.xi_r, priors.squared_lengthscale);
    };
    auto kg = [&](const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) {
        return kernel_g(a, b, priors.xi_g, priors.squared_lengthscale);
    };

    LatentState st;
    st.r = gp_interpolate(coarse_nodes.coords, coarse.r_bar, kr, fine_nodes.coords);
    st.g = gp_interpolate(coarse_nodes.coords, coarse.g_bar, kg, fine_nodes.coords)
               .cwiseMax(1e-6);

    Eigen::VectorXd l_coarse = coarse.r_bar.array().min(50.0).max(-50.0).exp();
    Eigen::VectorXd l_fine = st.r.array().min(50.0).max(-50.0).exp();
    GramMatrix ch_cc = gram_from_matrix(build_ch(coarse_nodes, coarse.r_bar));
    Eigen::MatrixXd cross(fine_nodes.k(), coarse_nodes.k());
    for (int q = 0; q < fine_nodes.k(); ++q)
        for (int t = 0; t < coarse_nodes.k(); ++t)
            cross(q, t) = kernel_h(fine_nodes.coords.row(q), coarse_nodes.coords.row(t),
                                   l_fine(q), l_coarse(t), L);
    st.H = gp_interpolate_columns(ch_cc, coarse.h_bar, cross);
    st.beta = coarse.beta_bar;
    st.assign.resize(0);
    st.refresh_y();
    return st;
}

PtgRunResult run_ptg_single(const Eigen::MatrixXd& X, const std::vector<Element>& elements,
                            const RunConfig& config, int restart,
                            const std::string& checkpoint_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(restart));

    PtgRunResult res;
    res.restart = restart;
    res.seed = seed;

    NodeSet coarse_nodes = config.coarse_nodes();
    NodeSet fine_nodes = config.fine_nodes();
    if (fine_nodes.k() < X.rows())
        throw InputError("run_ptg: expanded layout has " + std::to_string(fine_nodes.k()) +
                         " nodes for " + std::to_string(X.rows()) + " elements");

    auto stage = [&](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const InputError& e) {
            throw InputError("restart " + std::to_string(restart) + " (seed " +
                             std::to_string(seed) + ") stage " + name + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError("restart " + std::to_string(restart) + " (seed " +
                               std::to_string(seed) + ") stage " + name + ": " + e.what());
        }
    };

    ChainConfig chain = config.chain;
    chain.seed = seed;
    chain.checkpoint_path = checkpoint_path;

    PosteriorSummary coarse = stage("step1-chain", [&] {
        fs::path cp(checkpoint_path);
        if (!checkpoint_path.empty() && fs::exists(cp)) {
            ChainCheckpoint loaded = load_chain_checkpoint(checkpoint_path);
            return resume_chain(X, coarse_nodes, config.priors, chain, std::move(loaded));
        }
        return run_chain(X, coarse_nodes, config.priors, chain);
    });

    LatentState interp = stage("step2-interpolate", [&] {
        return interpolate_state(coarse, coarse_nodes, fine_nodes, config.priors);
    });

    FineTuneResult fine = stage("step3-fine-tune", [&] {
        return fine_tune(X, fine_nodes, interp, config.priors, config.fine_tune_iters);
    });

    res.table.elements = elements;
    res.table.node_of = fine.node_of;
    res.table.nodes = fine_nodes;
    res.table.provenance.seed = seed;
    res.table.provenance.config_hash = config_hash(config);
    res.table.provenance.final_loglik = fine.best_joint;
    res.table.check_invariants();

    res.final_state = fine.state;
    res.trace = coarse.trace;
    res.fine_tune_joint_trace = fine.joint_trace;
    res.fine_tune_best_iter = fine.best_iter;
    res.coarse_beta_bar = coarse.beta_bar;
    res.accept_rate_r = coarse.accept_rate_r;
    res.max_jitter = coarse.max_jitter;
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

int resolve_workers(int configured, int jobs) {
    int w = configured;
    if (const char* env = std::getenv("PTG_WORKERS")) w = std::atoi(env);
    if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
    if (w <= 0) w = 1;
    return std::max(1, std::min(w, jobs));
}

namespace {

std::vector<PtgRunResult> run_ptg_impl(const Eigen::MatrixXd& X,
                                       const std::vector<Element>& elements,
                                       const RunConfig& config,
                                       const std::vector<std::string>& checkpoint_paths,
                                       const std::vector<int>& restarts) {
    std::vector<PtgRunResult> results(restarts.size());
    std::atomic<size_t> next{0};
    std::vector<std::string> errors(restarts.size());
    const int workers = resolve_workers(config.workers, static_cast<int>(restarts.size()));

    auto work = [&] {
        for (size_t i = next.fetch_add(1); i < restarts.size(); i = next.fetch_add(1)) {
            try {
                results[i] = run_ptg_single(
                    X, elements, config, restarts[i],
                    checkpoint_paths.empty() ? std::string() : checkpoint_paths[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& err : errors)
        if (!err.empty()) throw NumericError(err);

    std::sort(results.begin(), results.end(), [](const PtgRunResult& a, const PtgRunResult& b) {
        if (a.table.provenance.final_loglik != b.table.provenance.final_loglik)
            return a.table.provenance.final_loglik > b.table.provenance.final_loglik;
        return a.restart < b.restart;
    });
    return results;
}

} // namespace

std::vector<PtgRunResult> run_ptg(const Eigen::MatrixXd& X, const std::vector<Element>& elements,
                                  const RunConfig& config) {
    std::vector<int> restarts(config.restarts);
    for (int i = 0; i < config.restarts; ++i) restarts[i] = i;
    return run_ptg_impl(X, elements, config, {}, restarts);
}

} // namespace ptg

// Split: run-directory artifact handling continues below.
namespace ptg {

namespace {

void export_table_csv(const std::string& path, const PeriodicTable& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write table CSV: " + path);
    f << "symbol,atomic_number,node_index,u1,u2" << (table.nodes.l() == 3 ? ",u3" : "") << "\n";
    for (int n = 0; n < table.n(); ++n) {
        const int k = table.node_of[n];
        f << table.elements[n].symbol << "," << table.elements[n].atomic_number << "," << k;
        for (int j = 0; j < table.nodes.l(); ++j) f << "," << num17(table.nodes.coords(k, j));
        f << "\n";
    }
    if (!f) throw InputError("table CSV write failed: " + path);
}

json nodes_to_json(const NodeSet& nodes) {
    json j;
    j["kind"] = layout_kind_name(nodes.kind);
    j["lo"] = nodes.lo;
    j["hi"] = nodes.hi;
    j["generation"] = nodes.generation;
    j["side"] = nodes.side;
    j["ring_sizes"] = nodes.ring_sizes;
    j["coords"] = detail::to_json(nodes.coords);
    return j;
}

NodeSet nodes_from_json(const json& j) {
    NodeSet n;
    n.kind = layout_kind_from_name(j["kind"].get<std::string>());
    n.lo = j["lo"].get<double>();
    n.hi = j["hi"].get<double>();
    n.generation = j["generation"].get<int>();
    n.side = j["side"].get<int>();
    n.ring_sizes = j["ring_sizes"].get<std::vector<int>>();
    n.coords = detail::matrix_from_json(j["coords"]);
    return n;
}

json table_bundle_json(const PtgRunResult& res, const ElementTable& data) {
    json j;
    j["format"] = "ptg-table";
    j["version"] = 1;
    j["restart"] = res.restart;
    j["seed"] = res.seed;
    j["config_hash"] = res.table.provenance.config_hash;
    j["final_loglik"] = res.table.provenance.final_loglik;
    j["elements"] = json::array();
    for (const auto& e : res.table.elements)
        j["elements"].push_back({{"symbol", e.symbol}, {"z", e.atomic_number}});
    j["node_of"] = res.table.node_of;
    j["nodes"] = nodes_to_json(res.table.nodes);
    j["state"] = {{"beta", res.final_state.beta},
                  {"g", detail::to_json(res.final_state.g)},
                  {"H", detail::to_json(res.final_state.H)},
                  {"r", detail::to_json(res.final_state.r)}};
    j["features"] = {{"names", data.feature_names},
                     {"standardized", data.standardized},
                     {"means", data.standardized ? detail::to_json(data.col_means) : json::array()},
                     {"scales",
                      data.standardized ? detail::to_json(data.col_scales) : json::array()}};
    j["coarse_beta_bar"] = res.coarse_beta_bar;
    j["accept_rate_r"] = res.accept_rate_r;
    j["max_jitter"] = res.max_jitter;
    j["fine_tune"] = {{"joint_trace", res.fine_tune_joint_trace},
                      {"best_iter", res.fine_tune_best_iter}};
    return j;
}

struct TableBundle {
    PeriodicTable table;
    LatentState state;
    ElementTable features; // names + de-standardization info only (no rows)
    int restart = 0;
};

TableBundle table_bundle_from_json(const json& j, const std::string& path) {
    if (j.value("format", "") != "ptg-table")
        throw InputError(path + ": not a table bundle");
    TableBundle b;
    b.restart = j["restart"].get<int>();
    for (const auto& e : j["elements"])
        b.table.elements.push_back({e["symbol"].get<std::string>(), e["z"].get<int>()});
    b.table.node_of = j["node_of"].get<std::vector<int>>();
    b.table.nodes = nodes_from_json(j["nodes"]);
    b.table.provenance.seed = j["seed"].get<std::uint64_t>();
    b.table.provenance.config_hash = j["config_hash"].get<std::string>();
    b.table.provenance.final_loglik = j["final_loglik"].get<double>();
    b.state.beta = j["state"]["beta"].get<double>();
    b.state.g = detail::vector_from_json(j["state"]["g"]);
    b.state.H = detail::matrix_from_json(j["state"]["H"]);
    b.state.r = detail::vector_from_json(j["state"]["r"]);
    b.state.refresh_y();
    b.features.feature_names = j["features"]["names"].get<std::vector<std::string>>();
    b.features.standardized = j["features"]["standardized"].get<bool>();
    if (b.features.standardized) {
        b.features.col_means = detail::vector_from_json(j["features"]["means"]);
        b.features.col_scales = detail::vector_from_json(j["features"]["scales"]);
    }
    b.features.elements = b.table.elements;
    b.features.features.resize(static_cast<int>(b.table.elements.size()),
                               static_cast<int>(b.features.feature_names.size()));
    b.features.features.setZero();
    return b;
}

json load_manifest(const std::string& run_dir) {
    std::string path = (fs::path(run_dir) / "manifest.json").string();
    std::ifstream f(path);
    if (!f) throw InputError("no manifest in run directory: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    if (j.value("format", "") != "ptg-manifest")
        throw InputError(path + ": unrecognized manifest");
    return j;
}

void save_manifest(const std::string& run_dir, const json& manifest) {
    write_text((fs::path(run_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void hash_outputs(const std::string& run_dir, json& manifest) {
    json files = json::object();
    for (auto it = fs::recursive_directory_iterator(run_dir);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), run_dir).generic_string();
        if (rel == "manifest.json") continue;
        files[rel] = fnv1a_hex(read_file_bytes(it->path().string()));
    }
    manifest["files"] = std::move(files);
}

std::string checkpoint_file(const std::string& run_dir, int restart) {
    return (fs::path(run_dir) / "checkpoints" / ("chain_" + restart_tag(restart) + ".json"))
        .string();
}

void write_restart_artifacts(const std::string& run_dir, const PtgRunResult& res,
                             const ElementTable& data) {
    const std::string tag = restart_tag(res.restart);
    export_table_csv((fs::path(run_dir) / "tables" / ("table_" + tag + ".csv")).string(),
                     res.table);
    write_text((fs::path(run_dir) / "tables" / ("table_" + tag + ".json")).string(),
               table_bundle_json(res, data).dump() + "\n");
    export_trace_csv((fs::path(run_dir) / "traces" / ("trace_" + tag + ".csv")).string(),
                     res.trace);
    export_table_svg((fs::path(run_dir) / "svg" / ("table_" + tag + ".svg")).string(), res.table);
}

ElementTable load_run_data(const RunConfig& config) {
    LoadOptions opts;
    opts.z_cutoff = config.z_cutoff;
    opts.error_on_missing_column = config.error_on_missing;
    ElementTable raw = load_elements(config.elements_path, opts);
    return standardize(raw);
}

} // namespace

std::string cmd_generate(const RunConfig& config) {
    config.validate();
    // Everything that can fail on bad input happens before the run directory
    // is created.
    ElementTable data = load_run_data(config);
    NodeSet fine = config.fine_nodes();
    if (fine.k() < data.n())
        throw InputError("config: expanded layout has " + std::to_string(fine.k()) +
                         " nodes but the data has " + std::to_string(data.n()) + " elements");

    const std::string run_dir = config.out_dir;
    if (fs::exists(fs::path(run_dir) / "manifest.json"))
        throw InputError("output directory already holds a run: " + run_dir);
    fs::create_directories(fs::path(run_dir) / "tables");
    fs::create_directories(fs::path(run_dir) / "traces");
    fs::create_directories(fs::path(run_dir) / "svg");
    fs::create_directories(fs::path(run_dir) / "checkpoints");
    write_text((fs::path(run_dir) / "config.resolved.cfg").string(), serialize_config(config));

    std::vector<int> restarts(config.restarts);
    std::vector<std::string> checkpoints(config.restarts);
    for (int i = 0; i < config.restarts; ++i) {
        restarts[i] = i;
        checkpoints[i] = checkpoint_file(run_dir, i);
    }
    std::vector<PtgRunResult> results = run_ptg_impl(data.features, data.elements, config,
                                                     checkpoints, restarts);

    json manifest;
    manifest["format"] = "ptg-manifest";
    manifest["version"] = 1;
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = config_hash(config);
    manifest["config_file"] = "config.resolved.cfg";
    manifest["master_seed"] = config.seed;
    manifest["restarts"] = config.restarts;
    json per_restart = json::object();
    json ranking = json::array();
    for (const auto& res : results) ranking.push_back(res.restart);
    for (const auto& res : results) {
        write_restart_artifacts(run_dir, res, data);
        per_restart[restart_tag(res.restart)] = {
            {"seed", res.seed},
            {"final_loglik", res.table.provenance.final_loglik},
            {"elapsed_seconds", res.elapsed_seconds},
            {"max_jitter", res.max_jitter},
            {"accept_rate_r", res.accept_rate_r},
        };
    }
    manifest["ranking_by_loglik"] = std::move(ranking);
    manifest["runs"] = std::move(per_restart);
    hash_outputs(run_dir, manifest);
    save_manifest(run_dir, manifest);
    return run_dir;
}

void cmd_resume(const std::string& run_dir) {
    const std::string cfg_path = (fs::path(run_dir) / "config.resolved.cfg").string();
    if (!fs::exists(cfg_path))
        throw InputError("not a run directory (missing config.resolved.cfg): " + run_dir);
    RunConfig config = load_config(cfg_path);
    ElementTable data = load_run_data(config);

    std::vector<int> missing;
    for (int i = 0; i < config.restarts; ++i)
        if (!fs::exists(fs::path(run_dir) / "tables" / ("table_" + restart_tag(i) + ".json")))
            missing.push_back(i);

    std::vector<std::string> checkpoints;
    checkpoints.reserve(missing.size());
    for (int i : missing) checkpoints.push_back(checkpoint_file(run_dir, i));
    std::vector<PtgRunResult> fresh;
    if (!missing.empty())
        fresh = run_ptg_impl(data.features, data.elements, config, checkpoints, missing);
    for (const auto& res : fresh) write_restart_artifacts(run_dir, res, data);

    // Rebuild the manifest from the now-complete artifact set.
    std::map<int, json> run_info;
    json manifest;
    if (fs::exists(fs::path(run_dir) / "manifest.json")) {
        json old = load_manifest(run_dir);
        if (old.contains("runs"))
            for (auto& [tag, info] : old["runs"].items()) run_info[std::stoi(tag)] = info;
    }
    for (const auto& res : fresh)
        run_info[res.restart] = {
            {"seed", res.seed},
            {"final_loglik", res.table.provenance.final_loglik},
            {"elapsed_seconds", res.elapsed_seconds},
            {"max_jitter", res.max_jitter},
            {"accept_rate_r", res.accept_rate_r},
        };

    manifest["format"] = "ptg-manifest";
    manifest["version"] = 1;
    manifest["tool_version"] = kToolVersion;
    manifest["config_hash"] = config_hash(config);
    manifest["config_file"] = "config.resolved.cfg";
    manifest["master_seed"] = config.seed;
    manifest["restarts"] = config.restarts;
    std::vector<std::pair<double, int>> rank;
    json runs = json::object();
    for (const auto& [restart, info] : run_info) {
        runs[restart_tag(restart)] = info;
        rank.emplace_back(info["final_loglik"].get<double>(), restart);
    }
    std::sort(rank.begin(), rank.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    json ranking = json::array();
    for (auto& [ll, restart] : rank) ranking.push_back(restart);
    manifest["ranking_by_loglik"] = std::move(ranking);
    manifest["runs"] = std::move(runs);
    hash_outputs(run_dir, manifest);
    save_manifest(run_dir, manifest);
}

namespace {

std::vector<TableBundle> load_all_tables(const std::string& run_dir) {
    std::vector<TableBundle> out;
    fs::path dir = fs::path(run_dir) / "tables";
    if (!fs::exists(dir)) throw InputError("run directory has no tables: " + run_dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        json j;
        std::ifstream f(p);
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw InputError(p + ": " + e.what());
        }
        out.push_back(table_bundle_from_json(j, p));
    }
    if (out.empty()) throw InputError("run directory has no tables: " + run_dir);
    return out;
}

void export_enrichment_csv(const std::string& path, const std::vector<EnrichmentRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        char ratio[64];
        std::snprintf(ratio, sizeof(ratio), "%.17g", row.ratio);
        cells.push_back({row.symbol, std::to_string(row.observed), num17(row.expected), ratio});
    }
    csv::write_file(path, {"symbol", "observed", "expected", "ratio"}, cells);
}

} // namespace

void cmd_evaluate(const std::string& run_dir, const std::string& compounds_csv, int workers) {
    RunConfig config = load_config((fs::path(run_dir) / "config.resolved.cfg").string());
    std::vector<TableBundle> bundles = load_all_tables(run_dir);

    // element identities for composition validation / the standard descriptor
    ElementTable idtable = bundles.front().features;
    CompoundDataset compounds = load_compounds(compounds_csv, idtable);

    CvConfig cv = config.cv;
    cv.workers = resolve_workers(workers > 0 ? workers : config.workers, cv.forest.trees);

    fs::create_directories(fs::path(run_dir) / "eval");

    std::vector<EvalReport> reports;
    std::vector<std::string> names;
    for (const auto& b : bundles) {
        Descriptor d = descriptor_from_table(b.table, "table_" + restart_tag(b.restart));
        reports.push_back(cross_validate(compounds, d, cv));
        names.push_back(d.name);
    }
    Descriptor std_desc = standard_table_descriptor(idtable);
    reports.push_back(cross_validate(compounds, std_desc, cv));
    names.push_back(std_desc.name);

    // rank by MAE, PTG tables only; the standard table is the baseline row
    std::vector<int> order(bundles.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (reports[a].mae_mean != reports[b].mae_mean)
            return reports[a].mae_mean < reports[b].mae_mean;
        return a < b;
    });
    const int best = order.front();

    json jr;
    jr["compounds"] = compounds_csv;
    jr["unit"] = compounds.unit;
    jr["n_compounds"] = compounds.size();
    jr["reports"] = json::array();
    for (size_t i = 0; i < reports.size(); ++i) {
        const EvalReport& r = reports[i];
        jr["reports"].push_back({{"descriptor", names[i]},
                                 {"mae_mean", r.mae_mean},
                                 {"mae_std", r.mae_std},
                                 {"rmse_mean", r.rmse_mean},
                                 {"rmse_std", r.rmse_std},
                                 {"folds", r.folds},
                                 {"repeats", r.repeats}});
    }
    jr["selected"] = names[best];
    write_text((fs::path(run_dir) / "eval" / "report.json").string(), jr.dump(2) + "\n");

    std::vector<std::vector<std::string>> rank_rows;
    for (int i : order)
        rank_rows.push_back({names[i], num17(reports[i].mae_mean), num17(reports[i].mae_std),
                             num17(reports[i].rmse_mean), num17(reports[i].rmse_std)});
    rank_rows.push_back({names.back(), num17(reports.back().mae_mean),
                         num17(reports.back().mae_std), num17(reports.back().rmse_mean),
                         num17(reports.back().rmse_std)});
    csv::write_file((fs::path(run_dir) / "eval" / "ranking.csv").string(),
                    {"descriptor", "mae_mean", "mae_std", "rmse_mean", "rmse_std"}, rank_rows);

    for (size_t i = 0; i < reports.size(); ++i) {
        std::vector<std::vector<std::string>> rows;
        for (size_t c = 0; c < reports[i].per_compound_abs_err.size(); ++c)
            rows.push_back({compounds.records[c].formula,
                            num17(reports[i].per_compound_abs_err[c])});
        csv::write_file(
            (fs::path(run_dir) / "eval" / ("errors_" + names[i] + ".csv")).string(),
            {"formula", "abs_error"}, rows);
    }

    EnrichmentTable enr = enrichment(reports[best], reports.back(), compounds, config.enrich_low,
                                     config.enrich_margin);
    export_enrichment_csv(
        (fs::path(run_dir) / "eval" / ("enrichment_" + names[best] + ".csv")).string(),
        enr.rows_a);
    export_enrichment_csv((fs::path(run_dir) / "eval" / "enrichment_standard.csv").string(),
                          enr.rows_b);

    json manifest = load_manifest(run_dir);
    manifest["selected_table"] = "tables/" + names[best] + ".json";
    manifest["selected_mae"] = reports[best].mae_mean;
    hash_outputs(run_dir, manifest);
    save_manifest(run_dir, manifest);
}

void cmd_landscape(const std::string& run_dir, const std::string& feature, int table_index) {
    std::vector<TableBundle> bundles = load_all_tables(run_dir);
    json manifest = load_manifest(run_dir);

    int restart = table_index;
    if (restart < 0) {
        if (manifest.contains("selected_table")) {
            std::string sel = manifest["selected_table"].get<std::string>();
            for (const auto& b : bundles)
                if (sel.find("table_" + restart_tag(b.restart)) != std::string::npos)
                    restart = b.restart;
        }
        if (restart < 0 && manifest.contains("ranking_by_loglik") &&
            !manifest["ranking_by_loglik"].empty())
            restart = manifest["ranking_by_loglik"][0].get<int>();
        if (restart < 0) restart = bundles.front().restart;
    }
    const TableBundle* chosen = nullptr;
    for (const auto& b : bundles)
        if (b.restart == restart) chosen = &b;
    if (!chosen) throw InputError("no table for restart " + std::to_string(restart));

    std::vector<int> indices;
    if (feature == "all") {
        indices.resize(chosen->features.feature_names.size());
        std::iota(indices.begin(), indices.end(), 0);
    } else {
        int idx = chosen->features.feature_index(feature);
        if (idx < 0) {
            std::string known;
            for (const auto& n : chosen->features.feature_names)
                known += (known.empty() ? "" : ", ") + n;
            throw InputError("unknown feature '" + feature + "'; valid names: " + known);
        }
        indices.push_back(idx);
    }

    fs::create_directories(fs::path(run_dir) / "landscapes");
    for (int idx : indices) {
        Landscape ls = landscape(idx, chosen->state, chosen->table.nodes, chosen->features);
        const std::string base = "landscape_" + restart_tag(restart) + "_" + ls.feature_name;
        export_landscape_csv((fs::path(run_dir) / "landscapes" / (base + ".csv")).string(), ls,
                             chosen->table.nodes);
        export_table_svg((fs::path(run_dir) / "landscapes" / (base + ".svg")).string(),
                         chosen->table, ls);
    }

    hash_outputs(run_dir, manifest);
    save_manifest(run_dir, manifest);
}

} // namespace ptg
