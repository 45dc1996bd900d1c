#include "ptg/csv.hpp"

#include "ptg/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ptg::csv {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

} // namespace

int Table::find(const std::string& name) const {
    for (int i = 0; i < ncols(); ++i)
        if (header[i] == name) return i;
    return -1;
}

Table parse(std::istream& in, const std::string& stream_name) {
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size())
            throw InputError(stream_name + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty())
        throw InputError(stream_name + ": empty file (no header row)");
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open file: " + path);
    return parse(f, path);
}

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write file: " + path);
    for (size_t i = 0; i < header.size(); ++i)
        f << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i)
            f << row[i] << (i + 1 < row.size() ? "," : "\n");
    if (!f) throw InputError("write failed: " + path);
}

double to_double(const std::string& cell, const std::string& context, int line) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    double v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw InputError(context + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    return v;
}

} // namespace ptg::csv
