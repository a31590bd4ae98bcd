#ifndef DEFPRED_SRC_CSV_UTIL_HPP
#define DEFPRED_SRC_CSV_UTIL_HPP

// Internal CSV helpers shared by the dataset and gate parsers and the CLI.
// Deliberately minimal: comma-separated cells, LF or CRLF endings, no quoting
// (none of the file schemas requires quoted fields).

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace defpred::csv {

// Split a document into lines, tolerating LF and CRLF and a missing final
// newline. A trailing empty line is dropped; interior blank lines are kept
// (the caller decides whether they are errors).
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

// Parse a decimal (plain or scientific). Returns false unless the whole cell
// is consumed.
inline bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

} // namespace defpred::csv

#endif // DEFPRED_SRC_CSV_UTIL_HPP
