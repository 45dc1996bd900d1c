#include "ptg/landscapes.hpp"

#include "ptg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ptg {

Landscape landscape(int feature_index, const LatentState& state, const NodeSet& nodes,
                    const ElementTable& table) {
    if (feature_index < 0 || feature_index >= table.d())
        throw InputError("landscape: feature index out of range");
    if (state.k() != nodes.k() || state.d() != table.d())
        throw InputError("landscape: state does not match nodes/table");
    Landscape ls;
    ls.feature_index = feature_index;
    ls.feature_name = table.feature_names[feature_index];
    ls.values = state.g.array() * state.H.col(feature_index).array();
    if (table.standardized)
        ls.values = ls.values.array() * table.col_scales(feature_index) +
                    table.col_means(feature_index);
    if (!ls.values.allFinite()) throw NumericError("landscape: non-finite node value");
    return ls;
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int period_of(int z) {
    if (z <= 2) return 1;
    if (z <= 10) return 2;
    if (z <= 18) return 3;
    if (z <= 36) return 4;
    if (z <= 54) return 5;
    if (z <= 86) return 6;
    return 7;
}

const char* kPeriodColor[7] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                               "#8172b3", "#937860", "#da8bc3"};

/// Two-colour diverging scale around the median, clamped to [min,max].
std::string heat_color(double v, double lo, double med, double hi) {
    auto channel = [](double a, double b, double t) {
        return static_cast<int>(std::lround(a + (b - a) * t));
    };
    // low #3b6fb6 -> white -> high #c63d3d
    double t;
    int r, g, b;
    if (v <= med) {
        t = med > lo ? (v - lo) / (med - lo) : 1.0;
        t = std::clamp(t, 0.0, 1.0);
        r = channel(0x3b, 0xff, t);
        g = channel(0x6f, 0xff, t);
        b = channel(0xb6, 0xff, t);
    } else {
        t = hi > med ? (v - med) / (hi - med) : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        r = channel(0xff, 0xc6, t);
        g = channel(0xff, 0x3d, t);
        b = channel(0xff, 0x3d, t);
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

struct View {
    int ax = 0, ay = 1; // latent axes projected to screen x, y
    std::string label;
};

double min_projected_spacing(const NodeSet& nodes, const View& view) {
    double best = nodes.hi - nodes.lo;
    for (int i = 0; i < nodes.k(); ++i)
        for (int j = i + 1; j < nodes.k(); ++j) {
            double dx = nodes.coords(i, view.ax) - nodes.coords(j, view.ax);
            double dy = nodes.coords(i, view.ay) - nodes.coords(j, view.ay);
            double d = std::sqrt(dx * dx + dy * dy);
            if (d > 1e-9 && d < best) best = d;
        }
    return best;
}

} // namespace

std::string render_table_svg(const PeriodicTable& table, const std::optional<Landscape>& underlay,
                             const SvgOptions& options) {
    table.check_invariants();
    const NodeSet& nodes = table.nodes;
    if (underlay && underlay->values.size() != nodes.k())
        throw InputError("render_table_svg: landscape does not match the node set");

    std::vector<View> views;
    if (nodes.l() == 2) {
        views.push_back({0, 1, ""});
    } else {
        views.push_back({0, 1, "top"});
        views.push_back({0, 2, "side"});
    }

    const double margin = 40.0;
    const double edge = options.canvas;
    const double footer = 34.0;
    const double width = margin + views.size() * (edge + margin);
    const double height = 2 * margin + edge + footer;
    const double span = nodes.hi - nodes.lo;

    double lo = 0, med = 0, hi = 0;
    if (underlay) {
        lo = underlay->values.minCoeff();
        hi = underlay->values.maxCoeff();
        std::vector<double> sorted(underlay->values.data(),
                                   underlay->values.data() + underlay->values.size());
        std::sort(sorted.begin(), sorted.end());
        const size_t m = sorted.size();
        med = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    }

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
        << "<rect class=\"bg\" x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" fill=\"#ffffff\"/>\n";

    for (size_t vi = 0; vi < views.size(); ++vi) {
        const View& view = views[vi];
        const double ox = margin + vi * (edge + margin);
        const double oy = margin;
        auto px = [&](double u) { return ox + (u - nodes.lo) / span * edge; };
        auto py = [&](double u) { return oy + (nodes.hi - u) / span * edge; };

        svg << "<g class=\"view\"";
        if (!view.label.empty()) svg << " id=\"" << view.label << "\"";
        svg << ">\n";

        const bool grid_cells = nodes.kind == LayoutKind::square && nodes.l() == 2;
        const double spacing = min_projected_spacing(nodes, view);
        const double cell_px = spacing / span * edge;

        // one cell shape per node
        for (int k = 0; k < nodes.k(); ++k) {
            const double cx = px(nodes.coords(k, view.ax));
            const double cy = py(nodes.coords(k, view.ay));
            std::string fill =
                underlay ? heat_color(underlay->values(k), lo, med, hi) : "#f4f4f4";
            if (grid_cells) {
                svg << "<rect class=\"cell\" x=\"" << num(cx - cell_px / 2) << "\" y=\""
                    << num(cy - cell_px / 2) << "\" width=\"" << num(cell_px) << "\" height=\""
                    << num(cell_px) << "\" fill=\"" << fill
                    << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
            } else {
                svg << "<circle class=\"cell\" cx=\"" << num(cx) << "\" cy=\"" << num(cy)
                    << "\" r=\"" << num(std::max(cell_px * 0.42, 4.0)) << "\" fill=\"" << fill
                    << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
            }
        }

        // element symbols, colour-coded by period
        const double sym_size = std::clamp(cell_px * 0.42, 8.0, 22.0);
        for (int n = 0; n < table.n(); ++n) {
            const int k = table.node_of[n];
            const double cx = px(nodes.coords(k, view.ax));
            const double cy = py(nodes.coords(k, view.ay));
            const Element& e = table.elements[n];
            const char* color = kPeriodColor[period_of(e.atomic_number) - 1];
            svg << "<g class=\"element\">"
                << "<text x=\"" << num(cx) << "\" y=\"" << num(cy + sym_size * 0.35)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\""
                << num(sym_size) << "\" font-weight=\"bold\" fill=\"" << color << "\">" << e.symbol
                << "</text>";
            if (options.show_atomic_numbers)
                svg << "<text x=\"" << num(cx) << "\" y=\"" << num(cy - sym_size * 0.55)
                    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\""
                    << num(sym_size * 0.55) << "\" fill=\"#666666\">" << e.atomic_number
                    << "</text>";
            svg << "</g>\n";
        }
        if (!view.label.empty())
            svg << "<text class=\"viewlabel\" x=\"" << num(ox + edge / 2) << "\" y=\""
                << num(oy - 12) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                << "font-size=\"15\" fill=\"#333333\">" << view.label << "</text>\n";
        svg << "</g>\n";
    }

    svg << "<g class=\"legend\"><text x=\"" << num(margin) << "\" y=\""
        << num(height - footer / 2) << "\" font-family=\"sans-serif\" font-size=\"14\" "
        << "fill=\"#333333\">";
    if (underlay)
        svg << underlay->feature_name << ": min=" << num(lo) << " median=" << num(med)
            << " max=" << num(hi);
    else
        svg << "layout: " << layout_kind_name(nodes.kind) << ", K=" << nodes.k();
    svg << "</text></g>\n</svg>\n";
    return svg.str();
}

void export_table_svg(const std::string& path, const PeriodicTable& table,
                      const std::optional<Landscape>& underlay, const SvgOptions& options) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write SVG: " + path);
    f << render_table_svg(table, underlay, options);
    if (!f) throw InputError("SVG write failed: " + path);
}

void export_landscape_csv(const std::string& path, const Landscape& ls, const NodeSet& nodes) {
    if (ls.values.size() != nodes.k())
        throw InputError("export_landscape_csv: landscape does not match the node set");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write landscape CSV: " + path);
    f << "node_index,u1,u2" << (nodes.l() == 3 ? ",u3" : "") << ",value\n";
    for (int k = 0; k < nodes.k(); ++k) {
        f << k;
        for (int j = 0; j < nodes.l(); ++j) f << "," << num17(nodes.coords(k, j));
        f << "," << num17(ls.values(k)) << "\n";
    }
    if (!f) throw InputError("landscape CSV write failed: " + path);
}

} // namespace ptg
