#ifndef RELD_CSV_HPP
#define RELD_CSV_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "reld/series.hpp"

namespace reld {

/// Malformed or unreadable input data. Row and column are 1-based; 0 means "not applicable".
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t column) {
        std::string msg = what;
        if (row != 0) {
            msg += " (row " + std::to_string(row);
            if (column != 0) {
                msg += ", column " + std::to_string(column);
            }
            msg += ")";
        }
        return msg;
    }

    std::size_t row_;
    std::size_t column_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) {
        return false;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace detail

/// Parse CSV text. Lines starting with '#' and blank lines are ignored. When `has_header` is set, the first
/// remaining line is a header; a leading column named "timestamp" or "date" is dropped.
inline Series parse_csv(std::istream& in, bool has_header, std::string name = {}) {
    std::string line;
    bool header_pending = has_header;
    bool skip_first_column = false;
    std::size_t cols = 0;
    std::size_t row = 0;
    std::vector<double> values;

    while (std::getline(in, line)) {
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        auto cells = detail::split_commas(view);
        if (header_pending) {
            header_pending = false;
            const auto first = detail::lower(cells.front());
            skip_first_column = first == "timestamp" || first == "date";
            cols = cells.size() - (skip_first_column ? 1 : 0);
            if (cols == 0) {
                throw DataError("header names no numeric columns", 0, 0);
            }
            continue;
        }
        ++row;
        const std::size_t offset = skip_first_column ? 1 : 0;
        if (cells.size() < offset + 1) {
            throw DataError("row has no numeric columns", row, 0);
        }
        const std::size_t found = cells.size() - offset;
        if (cols == 0) {
            cols = found;
        } else if (found != cols) {
            throw DataError("ragged row: expected " + std::to_string(cols) + " numeric columns, found " +
                                std::to_string(found),
                            row, 0);
        }
        for (std::size_t c = offset; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) {
                throw DataError("non-numeric cell '" + std::string(cells[c]) + "'", row, c + 1);
            }
            values.push_back(v);
        }
    }
    if (row == 0) {
        throw DataError("no data rows");
    }
    return Series(std::move(values), cols, std::move(name));
}

inline Series load_csv(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    try {
        return parse_csv(in, has_header, path.stem().string());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

/// Shortest round-trip representation of a double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Line-oriented CSV writer. An optional leading '#' comment records provenance.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
        if (!out_) {
            throw DataError("cannot write '" + path.string() + "'");
        }
    }

    CsvWriter& comment(const std::string& text) {
        out_ << "# " << text << '\n';
        return *this;
    }

    CsvWriter& header(std::initializer_list<std::string_view> names) {
        bool first = true;
        for (auto n : names) {
            out_ << (first ? "" : ",") << n;
            first = false;
        }
        out_ << '\n';
        return *this;
    }

    template <typename... Cells>
    CsvWriter& row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
        return *this;
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <typename Int>
        requires std::is_integral_v<Int>
    static std::string cell(Int v) {
        return std::to_string(v);
    }

    std::ofstream out_;
};

} // namespace reld

#endif
