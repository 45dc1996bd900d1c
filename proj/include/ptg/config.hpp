#pragma once

#include "ptg/data_model.hpp"
#include "ptg/evaluation.hpp"
#include "ptg/layouts.hpp"
#include "ptg/sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ptg {

/// Everything a run needs, parsed from a sectioned key-value file. Defaults
/// reproduce the reference analysis: 5x5 -> 9x9 square grid or the 4 -> 7
/// slice cone, xi_g = xi_r = (1/3, 3), T = 10000, T_b = 5000, stride 5,
/// T' = 10, R = 10 restarts.
struct RunConfig {
    // [data]
    std::string elements_path = "data/elements.csv";
    int z_cutoff = 54;
    bool error_on_missing = false;

    // [layout]
    LayoutKind layout = LayoutKind::square;
    int square_side = 5;
    std::vector<int> cone_rings{1, 4, 8, 12};
    std::vector<int> cone_rings_fine{1, 4, 8, 12, 16, 20, 24};
    std::string custom_coarse_path, custom_fine_path;
    double bound_lo = -1.0, bound_hi = 1.0;

    // [priors]
    Priors priors;

    // [chain]
    ChainConfig chain;

    // [fine_tune]
    int fine_tune_iters = 10;

    // [run]
    std::uint64_t seed = 0;
    int restarts = 10;
    int workers = 0; // 0 = hardware concurrency
    std::string out_dir = "ptg-run";

    // [eval]
    CvConfig cv;
    double enrich_low = 0.3;
    double enrich_margin = 1.0;

    NodeSet coarse_nodes() const;
    NodeSet fine_nodes() const;
    void validate() const;
};

RunConfig parse_config(const std::string& text, const std::string& name = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c and serialization is
/// idempotent under re-parsing.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 hash, hex-encoded; used for config identity in provenance.
std::string fnv1a_hex(const std::string& bytes);
std::string config_hash(const RunConfig& config);

} // namespace ptg
