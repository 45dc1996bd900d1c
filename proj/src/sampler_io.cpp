#include "ptg/errors.hpp"
#include "ptg/sampler.hpp"

#include "json_eigen.hpp"

#include <fstream>
#include <iomanip>

namespace ptg {

using nlohmann::json;

void save_chain_checkpoint(const std::string& path, const ChainCheckpoint& cp) {
    json j;
    j["format"] = "ptg-chain-checkpoint";
    j["version"] = cp.version;
    j["next_iter"] = cp.next_iter;
    j["rng_state"] = cp.rng_state;
    j["state"] = {{"assign", detail::to_json(cp.state.assign)},
                  {"beta", cp.state.beta},
                  {"g", detail::to_json(cp.state.g)},
                  {"H", detail::to_json(cp.state.H)},
                  {"r", detail::to_json(cp.state.r)}};
    j["recorded"] = cp.recorded;
    j["sum_beta"] = cp.sum_beta;
    j["sum_g"] = detail::to_json(cp.sum_g);
    j["sum_r"] = detail::to_json(cp.sum_r);
    j["sum_h"] = detail::to_json(cp.sum_h);
    j["sum_gamma"] = detail::to_json(cp.sum_gamma);
    j["accept_count"] = cp.accept_count;
    json trace = json::array();
    for (const auto& row : cp.trace)
        trace.push_back({row.iter, row.loglik, row.beta, row.accept_r});
    j["trace"] = std::move(trace);

    std::ofstream f(path);
    if (!f) throw InputError("cannot write checkpoint: " + path);
    f << j.dump() << "\n";
    if (!f) throw InputError("checkpoint write failed: " + path);
}

ChainCheckpoint load_chain_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open checkpoint: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError("checkpoint " + path + ": " + e.what());
    }
    if (j.value("format", "") != "ptg-chain-checkpoint")
        throw InputError("checkpoint " + path + ": unrecognized format");
    if (j.value("version", 0) != 1)
        throw InputError("checkpoint " + path + ": unsupported version");

    ChainCheckpoint cp;
    cp.version = j["version"].get<int>();
    cp.next_iter = j["next_iter"].get<int>();
    cp.rng_state = j["rng_state"].get<std::string>();
    cp.state.assign = detail::ivector_from_json(j["state"]["assign"]);
    cp.state.beta = j["state"]["beta"].get<double>();
    cp.state.g = detail::vector_from_json(j["state"]["g"]);
    cp.state.H = detail::matrix_from_json(j["state"]["H"]);
    cp.state.r = detail::vector_from_json(j["state"]["r"]);
    cp.state.refresh_y();
    cp.recorded = j["recorded"].get<int>();
    cp.sum_beta = j["sum_beta"].get<double>();
    cp.sum_g = detail::vector_from_json(j["sum_g"]);
    cp.sum_r = detail::vector_from_json(j["sum_r"]);
    cp.sum_h = detail::matrix_from_json(j["sum_h"]);
    cp.sum_gamma = detail::matrix_from_json(j["sum_gamma"]);
    cp.accept_count = j["accept_count"].get<long>();
    for (const auto& row : j["trace"])
        cp.trace.push_back({row[0].get<int>(), row[1].get<double>(), row[2].get<double>(),
                            row[3].get<int>()});
    return cp;
}

void export_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write trace: " + path);
    f << "iter,loglik,beta,accept_r\n";
    f << std::setprecision(17);
    for (const auto& row : trace)
        f << row.iter << "," << row.loglik << "," << row.beta << "," << row.accept_r << "\n";
    if (!f) throw InputError("trace write failed: " + path);
}

} // namespace ptg
