#pragma once

#include <Eigen/Core>
#include <string>
#include <unordered_map>
#include <vector>

namespace ptg {

struct Element {
    std::string symbol;
    int atomic_number = 0;
};

/// N elements x D numeric features, optionally standardized column-wise
/// (population variance, mean 0 / variance 1). The original column moments
/// are kept so landscape values can be reported in original units.
struct ElementTable {
    std::vector<Element> elements;
    Eigen::MatrixXd features; // N x D
    std::vector<std::string> feature_names;
    bool standardized = false;
    Eigen::VectorXd col_means;  // valid when standardized
    Eigen::VectorXd col_scales; // population std devs, valid when standardized

    int n() const { return static_cast<int>(features.rows()); }
    int d() const { return static_cast<int>(features.cols()); }
    /// Row index of a symbol, -1 if absent.
    int index_of(const std::string& symbol) const;
    int feature_index(const std::string& name) const;
    void check_invariants() const;

private:
    mutable std::unordered_map<std::string, int> symbol_index_;
};

struct LoadOptions {
    int z_cutoff = 54;
    /// Columns containing missing cells: drop with a warning (default) or fail.
    bool error_on_missing_column = false;
    /// Optional expected feature schema; load fails if the header differs.
    std::vector<std::string> expected_columns;
};

/// Read an element CSV (`symbol,atomic_number,<feature...>`), keep rows with
/// atomic number <= cutoff, and handle missing-value columns per options.
/// Dropped column names are appended to `dropped` when provided.
ElementTable load_elements(const std::string& path, const LoadOptions& options = {},
                           std::vector<std::string>* dropped = nullptr);

ElementTable standardize(const ElementTable& table);
ElementTable destandardize(const ElementTable& table);

/// A parsed chemical formula: element terms with raw counts plus the
/// normalized weight of each term (weights sum to 1).
struct Composition {
    std::vector<std::pair<std::string, double>> terms;
    std::vector<double> weights;
};

/// Parse formulas like "Fe2O3", "Ca(OH)2", "Li0.5CoO2" with nested
/// parentheses and fractional counts. Symbols are validated against the
/// periodic table of 118 elements; repeated symbols accumulate.
Composition parse_formula(const std::string& formula);

/// True for the 118 recognized element symbols.
bool is_element_symbol(const std::string& symbol);

struct CompoundRecord {
    std::string formula;
    Composition composition;
    double target = 0.0;
};

struct CompoundDataset {
    std::vector<CompoundRecord> records;
    std::string unit; // from the target header, e.g. "eV/atom"
    int size() const { return static_cast<int>(records.size()); }
};

/// Read a compound CSV (`formula,target` or `formula,target[<unit>]`) and
/// validate every composition against the element table.
CompoundDataset load_compounds(const std::string& path, const ElementTable& table);

} // namespace ptg
