#include "ptg/config.hpp"

#include "ptg/errors.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ptg {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct KvFile {
    // section -> key -> value, plus seen-tracking for schema validation
    std::map<std::string, std::map<std::string, std::string>> sections;

    static KvFile parse(const std::string& text, const std::string& name) {
        KvFile f;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[' && t.back() == ']') {
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw InputError(name + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (section.empty())
                throw InputError(name + ":" + std::to_string(lineno) + ": key outside a section");
            if (f.sections[section].count(key))
                throw InputError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                 "'");
            f.sections[section][key] = value;
        }
        return f;
    }
};

double parse_double(const std::string& v, const std::string& where) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw InputError(where + ": not a number: '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& where) {
    long long x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw InputError(where + ": not an integer: '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw InputError(where + ": expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ','))
        out.push_back(static_cast<int>(parse_int(trim(cur), where)));
    if (out.empty()) throw InputError(where + ": empty list");
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// the documented schema: section -> allowed keys
const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"data", {"elements", "z_cutoff", "on_missing"}},
        {"layout",
         {"kind", "square_side", "cone_rings", "cone_rings_fine", "custom_coarse", "custom_fine",
          "bound_lo", "bound_hi"}},
        {"priors", {"nu_g", "l_g", "nu_r", "l_r", "d_beta0", "s_beta0", "squared_lengthscale"}},
        {"chain", {"iters", "burn_in", "stride", "checkpoint_every"}},
        {"fine_tune", {"iters"}},
        {"run", {"seed", "restarts", "workers", "out"}},
        {"eval",
         {"folds", "repeats", "trees", "min_leaf", "max_features", "seed", "enrich_low",
          "enrich_margin"}},
    };
    return s;
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& name) {
    KvFile f = KvFile::parse(text, name);

    for (const auto& [section, kv] : f.sections) {
        auto it = schema().find(section);
        if (it == schema().end())
            throw InputError(name + ": unknown section [" + section + "]");
        for (const auto& [key, value] : kv) {
            bool ok = false;
            for (const auto& allowed : it->second) ok = ok || allowed == key;
            if (!ok)
                throw InputError(name + ": unknown key '" + key + "' in section [" + section +
                                 "]");
        }
    }

    RunConfig c;
    auto get = [&](const std::string& sec, const std::string& key,
                   auto&& apply) {
        auto si = f.sections.find(sec);
        if (si == f.sections.end()) return;
        auto ki = si->second.find(key);
        if (ki == si->second.end()) return;
        apply(ki->second, name + ": [" + sec + "] " + key);
    };

    get("data", "elements", [&](const std::string& v, const std::string&) { c.elements_path = v; });
    get("data", "z_cutoff",
        [&](const std::string& v, const std::string& w) { c.z_cutoff = (int)parse_int(v, w); });
    get("data", "on_missing", [&](const std::string& v, const std::string& w) {
        if (v == "drop") c.error_on_missing = false;
        else if (v == "error") c.error_on_missing = true;
        else throw InputError(w + ": expected drop/error");
    });

    get("layout", "kind",
        [&](const std::string& v, const std::string&) { c.layout = layout_kind_from_name(v); });
    get("layout", "square_side",
        [&](const std::string& v, const std::string& w) { c.square_side = (int)parse_int(v, w); });
    get("layout", "cone_rings",
        [&](const std::string& v, const std::string& w) { c.cone_rings = parse_int_list(v, w); });
    get("layout", "cone_rings_fine", [&](const std::string& v, const std::string& w) {
        c.cone_rings_fine = parse_int_list(v, w);
    });
    get("layout", "custom_coarse",
        [&](const std::string& v, const std::string&) { c.custom_coarse_path = v; });
    get("layout", "custom_fine",
        [&](const std::string& v, const std::string&) { c.custom_fine_path = v; });
    get("layout", "bound_lo",
        [&](const std::string& v, const std::string& w) { c.bound_lo = parse_double(v, w); });
    get("layout", "bound_hi",
        [&](const std::string& v, const std::string& w) { c.bound_hi = parse_double(v, w); });

    get("priors", "nu_g", [&](const std::string& v, const std::string& w) {
        c.priors.xi_g.variance = parse_double(v, w);
    });
    get("priors", "l_g", [&](const std::string& v, const std::string& w) {
        c.priors.xi_g.length_scale = parse_double(v, w);
    });
    get("priors", "nu_r", [&](const std::string& v, const std::string& w) {
        c.priors.xi_r.variance = parse_double(v, w);
    });
    get("priors", "l_r", [&](const std::string& v, const std::string& w) {
        c.priors.xi_r.length_scale = parse_double(v, w);
    });
    get("priors", "d_beta0", [&](const std::string& v, const std::string& w) {
        c.priors.d_beta0 = parse_double(v, w);
    });
    get("priors", "s_beta0", [&](const std::string& v, const std::string& w) {
        c.priors.s_beta0 = (v == "auto") ? 0.0 : parse_double(v, w);
    });
    get("priors", "squared_lengthscale", [&](const std::string& v, const std::string& w) {
        c.priors.squared_lengthscale = parse_bool(v, w);
    });

    get("chain", "iters",
        [&](const std::string& v, const std::string& w) { c.chain.iters = (int)parse_int(v, w); });
    get("chain", "burn_in", [&](const std::string& v, const std::string& w) {
        c.chain.burn_in = (int)parse_int(v, w);
    });
    get("chain", "stride",
        [&](const std::string& v, const std::string& w) { c.chain.stride = (int)parse_int(v, w); });
    get("chain", "checkpoint_every", [&](const std::string& v, const std::string& w) {
        c.chain.checkpoint_every = (int)parse_int(v, w);
    });

    get("fine_tune", "iters", [&](const std::string& v, const std::string& w) {
        c.fine_tune_iters = (int)parse_int(v, w);
    });

    get("run", "seed", [&](const std::string& v, const std::string& w) {
        c.seed = static_cast<std::uint64_t>(parse_int(v, w));
    });
    get("run", "restarts",
        [&](const std::string& v, const std::string& w) { c.restarts = (int)parse_int(v, w); });
    get("run", "workers",
        [&](const std::string& v, const std::string& w) { c.workers = (int)parse_int(v, w); });
    get("run", "out", [&](const std::string& v, const std::string&) { c.out_dir = v; });

    get("eval", "folds",
        [&](const std::string& v, const std::string& w) { c.cv.folds = (int)parse_int(v, w); });
    get("eval", "repeats",
        [&](const std::string& v, const std::string& w) { c.cv.repeats = (int)parse_int(v, w); });
    get("eval", "trees", [&](const std::string& v, const std::string& w) {
        c.cv.forest.trees = (int)parse_int(v, w);
    });
    get("eval", "min_leaf", [&](const std::string& v, const std::string& w) {
        c.cv.forest.min_leaf = (int)parse_int(v, w);
    });
    get("eval", "max_features", [&](const std::string& v, const std::string& w) {
        c.cv.forest.max_features = (int)parse_int(v, w);
    });
    get("eval", "seed", [&](const std::string& v, const std::string& w) {
        c.cv.seed = static_cast<std::uint64_t>(parse_int(v, w));
    });
    get("eval", "enrich_low", [&](const std::string& v, const std::string& w) {
        c.enrich_low = parse_double(v, w);
    });
    get("eval", "enrich_margin", [&](const std::string& v, const std::string& w) {
        c.enrich_margin = parse_double(v, w);
    });

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open config: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[data]\n";
    o << "elements = " << c.elements_path << "\n";
    o << "z_cutoff = " << c.z_cutoff << "\n";
    o << "on_missing = " << (c.error_on_missing ? "error" : "drop") << "\n";
    o << "\n[layout]\n";
    o << "kind = " << layout_kind_name(c.layout) << "\n";
    o << "square_side = " << c.square_side << "\n";
    o << "cone_rings = " << fmt_int_list(c.cone_rings) << "\n";
    o << "cone_rings_fine = " << fmt_int_list(c.cone_rings_fine) << "\n";
    if (!c.custom_coarse_path.empty()) o << "custom_coarse = " << c.custom_coarse_path << "\n";
    if (!c.custom_fine_path.empty()) o << "custom_fine = " << c.custom_fine_path << "\n";
    o << "bound_lo = " << fmt_double(c.bound_lo) << "\n";
    o << "bound_hi = " << fmt_double(c.bound_hi) << "\n";
    o << "\n[priors]\n";
    o << "nu_g = " << fmt_double(c.priors.xi_g.variance) << "\n";
    o << "l_g = " << fmt_double(c.priors.xi_g.length_scale) << "\n";
    o << "nu_r = " << fmt_double(c.priors.xi_r.variance) << "\n";
    o << "l_r = " << fmt_double(c.priors.xi_r.length_scale) << "\n";
    o << "d_beta0 = " << fmt_double(c.priors.d_beta0) << "\n";
    if (c.priors.s_beta0 > 0.0)
        o << "s_beta0 = " << fmt_double(c.priors.s_beta0) << "\n";
    else
        o << "s_beta0 = auto\n";
    o << "squared_lengthscale = " << (c.priors.squared_lengthscale ? "true" : "false") << "\n";
    o << "\n[chain]\n";
    o << "iters = " << c.chain.iters << "\n";
    o << "burn_in = " << c.chain.burn_in << "\n";
    o << "stride = " << c.chain.stride << "\n";
    o << "checkpoint_every = " << c.chain.checkpoint_every << "\n";
    o << "\n[fine_tune]\n";
    o << "iters = " << c.fine_tune_iters << "\n";
    o << "\n[run]\n";
    o << "seed = " << c.seed << "\n";
    o << "restarts = " << c.restarts << "\n";
    o << "workers = " << c.workers << "\n";
    o << "out = " << c.out_dir << "\n";
    o << "\n[eval]\n";
    o << "folds = " << c.cv.folds << "\n";
    o << "repeats = " << c.cv.repeats << "\n";
    o << "trees = " << c.cv.forest.trees << "\n";
    o << "min_leaf = " << c.cv.forest.min_leaf << "\n";
    o << "max_features = " << c.cv.forest.max_features << "\n";
    o << "seed = " << c.cv.seed << "\n";
    o << "enrich_low = " << fmt_double(c.enrich_low) << "\n";
    o << "enrich_margin = " << fmt_double(c.enrich_margin) << "\n";
    return o.str();
}

NodeSet RunConfig::coarse_nodes() const {
    switch (layout) {
        case LayoutKind::square: return square_grid(square_side, bound_lo, bound_hi);
        case LayoutKind::cone: return cone_layout(cone_rings, bound_lo, bound_hi);
        case LayoutKind::custom: {
            if (custom_coarse_path.empty())
                throw InputError("config: custom layout needs custom_coarse");
            return custom_layout(custom_coarse_path, bound_lo, bound_hi);
        }
    }
    throw InputError("config: bad layout");
}

NodeSet RunConfig::fine_nodes() const {
    switch (layout) {
        case LayoutKind::square: return expand_square(coarse_nodes());
        case LayoutKind::cone: {
            NodeSet ns = cone_layout(cone_rings_fine, bound_lo, bound_hi);
            ns.generation = 1;
            return ns;
        }
        case LayoutKind::custom: {
            if (custom_fine_path.empty())
                throw InputError("config: custom layout needs custom_fine");
            NodeSet ns = custom_layout(custom_fine_path, bound_lo, bound_hi);
            ns.generation = 1;
            return ns;
        }
    }
    throw InputError("config: bad layout");
}

void RunConfig::validate() const {
    if (z_cutoff < 1) throw InputError("config: z_cutoff must be >= 1");
    if (!(bound_hi > bound_lo)) throw InputError("config: bounds are empty");
    if (layout == LayoutKind::square && square_side < 2)
        throw InputError("config: square_side must be >= 2");
    if (!(priors.xi_g.variance > 0) || !(priors.xi_g.length_scale > 0) ||
        !(priors.xi_r.variance > 0) || !(priors.xi_r.length_scale > 0))
        throw InputError("config: kernel hyperparameters must be positive");
    if (!(priors.d_beta0 > 0) || priors.s_beta0 < 0)
        throw InputError("config: beta prior must be positive");
    chain.validate();
    if (fine_tune_iters < 0) throw InputError("config: fine_tune iters must be >= 0");
    if (restarts < 1) throw InputError("config: restarts must be >= 1");
    if (workers < 0) throw InputError("config: workers must be >= 0");
    if (cv.folds < 2) throw InputError("config: eval folds must be >= 2");
    if (cv.repeats < 1) throw InputError("config: eval repeats must be >= 1");
    if (cv.forest.trees < 1 || cv.forest.min_leaf < 1)
        throw InputError("config: forest hyperparameters out of range");
    if (!(enrich_low > 0) || !(enrich_margin > 0))
        throw InputError("config: enrichment thresholds must be positive");
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::string config_hash(const RunConfig& config) {
    return fnv1a_hex(serialize_config(config));
}

} // namespace ptg
