#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bitemp::csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Reads all data rows after checking the header matches exactly.
inline std::vector<std::vector<std::string>> read(std::istream& in, const std::string& header) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV, expected header '" + header + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw std::runtime_error("unexpected CSV header '" + line + "', expected '" + header + "'");
    std::vector<std::vector<std::string>> rows;
    std::size_t width = split(header).size();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split(line);
        if (fields.size() != width)
            throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                                     " fields, got " + std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace bitemp::csv
