#pragma once

/**
 * @file csv.hpp
 * @brief Round-trippable CSV output and the interpolation-node input format for paths.
 */

#include "path.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pathcalc {

/// %.17g, so every double survives a text round trip.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row() {
        rows_.emplace_back();
        return *this;
    }
    CsvTable& add(double v) { return add_text(format_double(v)); }
    CsvTable& add(int v) { return add_text(std::to_string(v)); }
    CsvTable& add(const std::string& s) { return add_text(s); }
    CsvTable& add(const char* s) { return add_text(s); }

    /// Header, rows, then one trailing `# config: ...` line.
    void write(std::ostream& os, const std::string& config) const {
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
        os << "# config: " << config << '\n';
    }

private:
    CsvTable& add_text(std::string s) {
        detail::require(!rows_.empty(), "add() before row()");
        rows_.back().push_back(std::move(s));
        return *this;
    }

    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Reads `t,x1[,x2,...]` interpolation nodes into a piecewise-linear path.
inline CadlagPath read_path_csv(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    int dim = -1;
    std::vector<double> times;
    std::vector<Vector> values;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (dim < 0) {
            detail::require(cells.size() >= 2 && cells[0] == "t",
                            source + ": header must be t,x1[,x2,...] (line " + std::to_string(lineno) + ")");
            dim = static_cast<int>(cells.size()) - 1;
            continue;
        }
        detail::require(static_cast<int>(cells.size()) == dim + 1,
                        source + ": wrong number of columns on line " + std::to_string(lineno));
        Vector v(dim);
        try {
            times.push_back(std::stod(cells[0]));
            for (int k = 0; k < dim; ++k) v(k) = std::stod(cells[static_cast<std::size_t>(k) + 1]);
        } catch (const std::exception&) {
            throw InvalidArgument(source + ": malformed number on line " + std::to_string(lineno));
        }
        values.push_back(v);
    }
    detail::require(times.size() >= 2, source + ": need at least two interpolation nodes");
    return piecewise_linear(times, values);
}

inline CadlagPath read_path_csv_file(const std::string& file) {
    std::ifstream in(file);
    detail::require(static_cast<bool>(in), "cannot open path file '" + file + "'");
    return read_path_csv(in, file);
}

} // namespace pathcalc
