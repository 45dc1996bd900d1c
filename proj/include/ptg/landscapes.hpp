#pragma once

#include "ptg/assignment.hpp"
#include "ptg/data_model.hpp"
#include "ptg/layouts.hpp"
#include "ptg/sampler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ptg {

/// The model's reconstruction of one feature over the node layout,
/// reported in the feature's original units.
struct Landscape {
    std::string feature_name;
    Eigen::VectorXd values; // one per node
    int feature_index = -1;
};

/// Node value = g_k * h_{k,d}, de-standardized with the stored column
/// mean/scale when the table is standardized.
Landscape landscape(int feature_index, const LatentState& state, const NodeSet& nodes,
                    const ElementTable& table);

void export_landscape_csv(const std::string& path, const Landscape& ls, const NodeSet& nodes);

struct SvgOptions {
    double canvas = 760.0; // per-view edge length in px
    bool show_atomic_numbers = true;
};

/// Deterministic SVG rendering of a table: one panel for 2-D layouts, top
/// (x,y) and side (x,z) projections for 3-D ones. Element symbols are
/// colour-coded by period; an optional landscape paints per-node cells with
/// a two-colour diverging scale around the median and a printed min/max.
std::string render_table_svg(const PeriodicTable& table,
                             const std::optional<Landscape>& underlay = std::nullopt,
                             const SvgOptions& options = {});

void export_table_svg(const std::string& path, const PeriodicTable& table,
                      const std::optional<Landscape>& underlay = std::nullopt,
                      const SvgOptions& options = {});

} // namespace ptg
