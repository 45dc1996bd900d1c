#include "ptg/layouts.hpp"

#include "ptg/csv.hpp"
#include "ptg/errors.hpp"

#include <cmath>
#include <numbers>

namespace ptg {

std::string layout_kind_name(LayoutKind k) {
    switch (k) {
        case LayoutKind::square: return "square";
        case LayoutKind::cone: return "cone";
        case LayoutKind::custom: return "custom";
    }
    return "custom";
}

LayoutKind layout_kind_from_name(const std::string& name) {
    if (name == "square") return LayoutKind::square;
    if (name == "cone") return LayoutKind::cone;
    if (name == "custom") return LayoutKind::custom;
    throw InputError("unknown layout kind: '" + name + "'");
}

void NodeSet::check_invariants() const {
    for (int i = 0; i < k(); ++i)
        for (int j = 0; j < l(); ++j)
            if (coords(i, j) < lo - 1e-12 || coords(i, j) > hi + 1e-12)
                throw InputError("node " + std::to_string(i) + " outside layout bounds");
    for (int i = 0; i < k(); ++i)
        for (int j = i + 1; j < k(); ++j)
            if ((coords.row(i) - coords.row(j)).norm() <= 1e-9)
                throw InputError("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                                 " coincide");
    if (kind == LayoutKind::square) {
        if (side * side != k())
            throw InputError("square layout: K is not a perfect square");
    }
}

NodeSet square_grid(int m, double lo, double hi) {
    if (m < 2) throw InputError("square_grid: need at least 2 nodes per side");
    if (!(hi > lo)) throw InputError("square_grid: empty bounds");
    Eigen::VectorXd axis(m);
    for (int i = 0; i < m; ++i)
        axis(i) = (i == m - 1) ? hi : lo + i * (hi - lo) / (m - 1);
    NodeSet ns;
    ns.kind = LayoutKind::square;
    ns.lo = lo;
    ns.hi = hi;
    ns.side = m;
    ns.generation = 0;
    ns.coords.resize(m * m, 2);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            ns.coords(i * m + j, 0) = axis(i);
            ns.coords(i * m + j, 1) = axis(j);
        }
    ns.check_invariants();
    return ns;
}

NodeSet expand_square(const NodeSet& nodes, std::vector<int>* old_to_new) {
    if (nodes.kind != LayoutKind::square)
        throw InputError("expand_square: not a square layout");
    if (nodes.generation != 0)
        throw InputError("expand_square: layout is already expanded");
    const int m = nodes.side;
    const int mf = 2 * m - 1;

    // Even fine indices copy the coarse axis values verbatim so the original
    // nodes survive bit-exactly; odd indices are midpoints.
    Eigen::VectorXd coarse(m);
    for (int i = 0; i < m; ++i) coarse(i) = nodes.coords(i * m, 0);
    Eigen::VectorXd axis(mf);
    for (int i = 0; i < m; ++i) axis(2 * i) = coarse(i);
    for (int i = 0; i + 1 < m; ++i) axis(2 * i + 1) = 0.5 * (coarse(i) + coarse(i + 1));

    NodeSet out;
    out.kind = LayoutKind::square;
    out.lo = nodes.lo;
    out.hi = nodes.hi;
    out.side = mf;
    out.generation = 1;
    out.coords.resize(mf * mf, 2);
    for (int i = 0; i < mf; ++i)
        for (int j = 0; j < mf; ++j) {
            out.coords(i * mf + j, 0) = axis(i);
            out.coords(i * mf + j, 1) = axis(j);
        }
    if (old_to_new) {
        old_to_new->assign(m * m, -1);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) (*old_to_new)[i * m + j] = (2 * i) * mf + (2 * j);
    }
    out.check_invariants();
    return out;
}

NodeSet cone_layout(const std::vector<int>& ring_sizes, double lo, double hi) {
    if (ring_sizes.empty()) throw InputError("cone_layout: empty ring schedule");
    if (ring_sizes.front() != 1) throw InputError("cone_layout: first ring must be the apex (1)");
    for (int r : ring_sizes)
        if (r < 1) throw InputError("cone_layout: ring size must be >= 1");
    if (!(hi > lo)) throw InputError("cone_layout: empty bounds");

    int total = 0;
    for (int r : ring_sizes) total += r;
    const int slices = static_cast<int>(ring_sizes.size());
    const double base_radius = (hi - lo) / 2.0;
    const double cx = (hi + lo) / 2.0, cy = cx;

    NodeSet ns;
    ns.kind = LayoutKind::cone;
    ns.lo = lo;
    ns.hi = hi;
    ns.ring_sizes = ring_sizes;
    ns.coords.resize(total, 3);
    int row = 0;
    for (int j = 0; j < slices; ++j) {
        double frac = slices == 1 ? 0.0 : static_cast<double>(j) / (slices - 1);
        double z = hi - frac * (hi - lo); // apex on top
        double radius = base_radius * frac;
        const int cnt = ring_sizes[j];
        for (int a = 0; a < cnt; ++a) {
            double angle = 2.0 * std::numbers::pi * a / cnt;
            ns.coords(row, 0) = cx + radius * std::cos(angle);
            ns.coords(row, 1) = cy + radius * std::sin(angle);
            ns.coords(row, 2) = z;
            ++row;
        }
    }
    ns.check_invariants();
    return ns;
}

NodeSet custom_layout(const std::string& path, double lo, double hi) {
    csv::Table t = csv::read_file(path);
    bool three = t.ncols() == 3;
    if (!(t.ncols() == 2 || three) || t.header[0] != "x" || t.header[1] != "y" ||
        (three && t.header[2] != "z"))
        throw InputError(path + ": custom layout header must be 'x,y' or 'x,y,z'");
    if (t.nrows() == 0) throw InputError(path + ": custom layout has no nodes");
    NodeSet ns;
    ns.kind = LayoutKind::custom;
    ns.lo = lo;
    ns.hi = hi;
    ns.coords.resize(t.nrows(), three ? 3 : 2);
    for (int i = 0; i < t.nrows(); ++i)
        for (int j = 0; j < ns.l(); ++j)
            ns.coords(i, j) = csv::to_double(t.rows[i][j], path, i + 2);
    ns.check_invariants();
    return ns;
}

} // namespace ptg
