#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ptg {

enum class LayoutKind { square, cone, custom };

std::string layout_kind_name(LayoutKind k);
LayoutKind layout_kind_from_name(const std::string& name);

/// A fixed set of K latent-space points. `generation` distinguishes the
/// coarse set (0) used for the initial fit from the expanded set (1) used
/// for one-to-one assignment.
struct NodeSet {
    Eigen::MatrixXd coords; // K x L
    LayoutKind kind = LayoutKind::custom;
    double lo = -1.0, hi = 1.0;
    int generation = 0;
    int side = 0;                // square: nodes per side
    std::vector<int> ring_sizes; // cone: nodes per slice, apex first

    int k() const { return static_cast<int>(coords.rows()); }
    int l() const { return static_cast<int>(coords.cols()); }
    void check_invariants() const;
};

/// m x m grid on [lo,hi]^2, row-major with both axes ascending.
NodeSet square_grid(int m, double lo = -1.0, double hi = 1.0);

/// Insert midpoints between adjacent grid nodes: m -> 2m-1 per side. The
/// original coordinates are preserved exactly; `old_to_new`, when given,
/// receives the index of each coarse node in the expanded set.
NodeSet expand_square(const NodeSet& nodes, std::vector<int>* old_to_new = nullptr);

/// Nodes on the lateral surface of a cone inside [lo,hi]^3: one slice per
/// ring size, apex (first entry, must be 1) at the top, base at the bottom,
/// ring radius growing linearly to the base radius, nodes equally spaced in
/// angle with phase 0.
NodeSet cone_layout(const std::vector<int>& ring_sizes, double lo = -1.0, double hi = 1.0);

/// Read node coordinates from a CSV with header `x,y` or `x,y,z`.
NodeSet custom_layout(const std::string& path, double lo = -1.0, double hi = 1.0);

} // namespace ptg
