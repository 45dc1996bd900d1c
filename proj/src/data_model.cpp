#include "ptg/data_model.hpp"

#include "ptg/csv.hpp"
#include "ptg/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <iostream>
#include <set>

namespace ptg {

namespace {

constexpr std::array<const char*, 118> kSymbols = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

const std::set<std::string>& symbol_set() {
    static const std::set<std::string> s(kSymbols.begin(), kSymbols.end());
    return s;
}

} // namespace

bool is_element_symbol(const std::string& symbol) {
    return symbol_set().count(symbol) > 0;
}

int ElementTable::index_of(const std::string& symbol) const {
    if (symbol_index_.empty()) {
        for (int i = 0; i < n(); ++i) symbol_index_[elements[i].symbol] = i;
    }
    auto it = symbol_index_.find(symbol);
    return it == symbol_index_.end() ? -1 : it->second;
}

int ElementTable::feature_index(const std::string& name) const {
    for (int j = 0; j < d(); ++j)
        if (feature_names[j] == name) return j;
    return -1;
}

void ElementTable::check_invariants() const {
    if (static_cast<int>(elements.size()) != n())
        throw InputError("element table: row count mismatch");
    if (static_cast<int>(feature_names.size()) != d())
        throw InputError("element table: feature name count mismatch");
    std::set<int> seen;
    for (const auto& e : elements) {
        if (e.atomic_number < 1 || e.atomic_number > 118)
            throw InputError("element table: atomic number out of range for " + e.symbol);
        if (!seen.insert(e.atomic_number).second)
            throw InputError("element table: duplicate atomic number " +
                             std::to_string(e.atomic_number));
    }
    if (!features.allFinite()) throw InputError("element table: non-finite feature value");
    if (standardized) {
        const double nn = static_cast<double>(n());
        for (int j = 0; j < d(); ++j) {
            double mean = features.col(j).mean();
            double var = features.col(j).squaredNorm() / nn - mean * mean;
            if (std::abs(mean) > 1e-9 || std::abs(var - 1.0) > 1e-9)
                throw NumericError("element table: column '" + feature_names[j] +
                                   "' fails the standardization invariant");
        }
    }
}

ElementTable load_elements(const std::string& path, const LoadOptions& options,
                           std::vector<std::string>* dropped) {
    csv::Table t = csv::read_file(path);
    if (t.ncols() < 2 || t.header[0] != "symbol" || t.header[1] != "atomic_number")
        throw InputError(path + ": header must start with 'symbol,atomic_number'");
    if (!options.expected_columns.empty()) {
        std::vector<std::string> have(t.header.begin() + 1, t.header.end());
        if (have != options.expected_columns)
            throw InputError(path + ": header does not match the expected column list");
    }

    // atomic_number doubles as the first feature column.
    std::vector<std::string> names(t.header.begin() + 1, t.header.end());
    const int dall = static_cast<int>(names.size());

    std::vector<int> kept_rows;
    for (int i = 0; i < t.nrows(); ++i) {
        const std::string& zs = t.rows[i][1];
        if (zs.empty()) throw InputError(path + ": row " + std::to_string(i + 2) +
                                         " has no atomic number");
        int z = static_cast<int>(csv::to_double(zs, path, i + 2));
        if (z >= 1 && z <= options.z_cutoff) kept_rows.push_back(i);
    }

    std::vector<bool> col_ok(dall, true);
    for (int j = 0; j < dall; ++j)
        for (int ri : kept_rows)
            if (t.rows[ri][j + 1].empty()) col_ok[j] = false;

    std::vector<std::string> bad;
    for (int j = 0; j < dall; ++j)
        if (!col_ok[j]) bad.push_back(names[j]);
    if (!bad.empty()) {
        std::string list;
        for (const auto& s : bad) list += (list.empty() ? "" : ", ") + s;
        if (options.error_on_missing_column)
            throw InputError(path + ": columns with missing values: " + list);
        std::cerr << "warning: " << path << ": dropping columns with missing values: " << list
                  << "\n";
        if (dropped) dropped->insert(dropped->end(), bad.begin(), bad.end());
    }

    ElementTable table;
    int dkeep = 0;
    for (bool ok : col_ok) dkeep += ok ? 1 : 0;
    table.features.resize(static_cast<int>(kept_rows.size()), dkeep);
    for (int j = 0; j < dall; ++j)
        if (col_ok[j]) table.feature_names.push_back(names[j]);

    int r = 0;
    for (int ri : kept_rows) {
        const auto& row = t.rows[ri];
        Element e;
        e.symbol = row[0];
        e.atomic_number = static_cast<int>(csv::to_double(row[1], path, ri + 2));
        if (!is_element_symbol(e.symbol))
            throw InputError(path + ": row " + std::to_string(ri + 2) + ": unknown symbol '" +
                             e.symbol + "'");
        table.elements.push_back(e);
        int jj = 0;
        for (int j = 0; j < dall; ++j) {
            if (!col_ok[j]) continue;
            table.features(r, jj++) = csv::to_double(row[j + 1], path, ri + 2);
        }
        ++r;
    }
    table.check_invariants();
    return table;
}

ElementTable standardize(const ElementTable& table) {
    if (table.standardized) throw InputError("standardize: table is already standardized");
    const int n = table.n(), d = table.d();
    ElementTable out = table;
    out.col_means.resize(d);
    out.col_scales.resize(d);
    for (int j = 0; j < d; ++j) {
        double mean = table.features.col(j).mean();
        double var = (table.features.col(j).array() - mean).square().sum() / n;
        if (var <= 0.0)
            throw InputError("standardize: column '" + table.feature_names[j] +
                             "' has zero variance");
        double scale = std::sqrt(var);
        out.col_means(j) = mean;
        out.col_scales(j) = scale;
        out.features.col(j) = (table.features.col(j).array() - mean) / scale;
    }
    out.standardized = true;
    return out;
}

ElementTable destandardize(const ElementTable& table) {
    if (!table.standardized) throw InputError("destandardize: table is not standardized");
    ElementTable out = table;
    for (int j = 0; j < table.d(); ++j)
        out.features.col(j) =
            table.features.col(j).array() * table.col_scales(j) + table.col_means(j);
    out.standardized = false;
    out.col_means.resize(0);
    out.col_scales.resize(0);
    return out;
}

namespace {

// Recursive-descent formula parser.
//   formula  := unit+
//   unit     := (symbol | '(' formula ')') count?
//   count    := positive real
struct FormulaParser {
    const std::string& s;
    size_t pos = 0;

    explicit FormulaParser(const std::string& str) : s(str) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("parse_formula: '" + s + "' at position " + std::to_string(pos) + ": " +
                         msg);
    }

    bool done() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }

    double parse_count() {
        size_t start = pos;
        while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
            ++pos;
        if (pos == start) return 1.0;
        double v;
        try {
            size_t used = 0;
            v = std::stod(s.substr(start, pos - start), &used);
            if (used != pos - start) fail("bad count");
        } catch (const std::exception&) {
            fail("bad count");
        }
        if (!(v > 0.0)) fail("count must be positive");
        return v;
    }

    std::string parse_symbol() {
        if (done() || !std::isupper(static_cast<unsigned char>(peek()))) fail("expected element symbol");
        std::string sym(1, s[pos++]);
        if (!done() && std::islower(static_cast<unsigned char>(peek()))) sym += s[pos++];
        if (!is_element_symbol(sym)) fail("unknown symbol '" + sym + "'");
        return sym;
    }

    void parse_group(double multiplier, std::vector<std::pair<std::string, double>>& acc,
                     int depth) {
        if (depth > 32) fail("parentheses nested too deeply");
        bool any = false;
        while (!done() && peek() != ')') {
            if (peek() == '(') {
                ++pos;
                std::vector<std::pair<std::string, double>> inner;
                parse_group(1.0, inner, depth + 1);
                if (done() || peek() != ')') fail("unbalanced parentheses");
                ++pos;
                double count = parse_count();
                for (auto& [sym, c] : inner) acc.emplace_back(sym, c * count * multiplier);
            } else {
                std::string sym = parse_symbol();
                double count = parse_count();
                acc.emplace_back(sym, count * multiplier);
            }
            any = true;
        }
        if (!any) fail("empty group");
    }
};

} // namespace

Composition parse_formula(const std::string& formula) {
    FormulaParser p(formula);
    std::vector<std::pair<std::string, double>> raw;
    p.parse_group(1.0, raw, 0);
    if (!p.done()) p.fail("unbalanced parentheses");

    // Merge repeated symbols, keeping first-appearance order.
    Composition comp;
    for (const auto& [sym, count] : raw) {
        bool merged = false;
        for (auto& term : comp.terms)
            if (term.first == sym) {
                term.second += count;
                merged = true;
                break;
            }
        if (!merged) comp.terms.emplace_back(sym, count);
    }
    double total = 0;
    for (const auto& t : comp.terms) total += t.second;
    comp.weights.reserve(comp.terms.size());
    for (const auto& t : comp.terms) comp.weights.push_back(t.second / total);
    return comp;
}

CompoundDataset load_compounds(const std::string& path, const ElementTable& table) {
    csv::Table t = csv::read_file(path);
    if (t.ncols() != 2 || t.header[0] != "formula")
        throw InputError(path + ": header must be 'formula,target'");
    const std::string& tgt = t.header[1];
    if (tgt.rfind("target", 0) != 0)
        throw InputError(path + ": second column must be 'target' or 'target[<unit>]'");

    CompoundDataset ds;
    auto lb = tgt.find('[');
    if (lb != std::string::npos && tgt.back() == ']')
        ds.unit = tgt.substr(lb + 1, tgt.size() - lb - 2);

    for (int i = 0; i < t.nrows(); ++i) {
        CompoundRecord rec;
        rec.formula = t.rows[i][0];
        rec.composition = parse_formula(rec.formula);
        for (const auto& [sym, count] : rec.composition.terms)
            if (table.index_of(sym) < 0)
                throw InputError(path + ":" + std::to_string(i + 2) + ": element '" + sym +
                                 "' not present in the element table");
        rec.target = csv::to_double(t.rows[i][1], path, i + 2);
        if (!std::isfinite(rec.target))
            throw InputError(path + ":" + std::to_string(i + 2) + ": non-finite target");
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

} // namespace ptg
