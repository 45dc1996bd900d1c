#pragma once

#include <istream>
#include <string>
#include <vector>

namespace ptg::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int ncols() const { return static_cast<int>(header.size()); }
    int nrows() const { return static_cast<int>(rows.size()); }
    /// Column index by name, -1 if absent.
    int find(const std::string& name) const;
};

/// Parse a comma-separated table with a mandatory header row.
/// Cells are trimmed; empty cells are kept as "". Quoting is not supported
/// (none of the file formats here need it). Throws InputError with the
/// 1-based line number on ragged rows.
Table parse(std::istream& in, const std::string& stream_name);

Table read_file(const std::string& path);

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

/// Strict double parse; throws InputError naming the cell on failure.
double to_double(const std::string& cell, const std::string& context, int line);

} // namespace ptg::csv
