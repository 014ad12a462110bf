#include "core/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace evt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

} // namespace

CsvTable parse_csv(const std::string& text, std::size_t expected_cols,
                   MissingPolicy policy) {
    std::stringstream input(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(input, line)) {
        throw DataError("csv: empty input");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    CsvTable table;
    for (const auto& name : split_line(line)) {
        table.column_names.push_back(trim(name));
    }
    const std::size_t d = table.column_names.size();
    if (d == 0) {
        throw DataError("csv: header has no columns");
    }
    if (expected_cols != 0 && d != expected_cols) {
        throw DataError("csv: schema mismatch: expected " + std::to_string(expected_cols) +
                        " columns, found " + std::to_string(d));
    }

    std::vector<double> values;
    std::vector<double> row(d);
    std::size_t n_rows = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != d) {
            throw DataError("csv: line " + std::to_string(line_no) + ": expected " +
                            std::to_string(d) + " cells, found " + std::to_string(cells.size()));
        }
        bool missing = false;
        for (std::size_t i = 0; i < d; ++i) {
            const std::string cell = trim(cells[i]);
            if (is_missing(cell)) {
                missing = true;
                continue;
            }
            double value = 0.0;
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc{} || ptr != end) {
                throw DataError("csv: line " + std::to_string(line_no) + ": cannot parse '" +
                                cell + "' as a number");
            }
            row[i] = value;
        }
        if (missing) {
            if (policy == MissingPolicy::Error) {
                throw DataError("csv: line " + std::to_string(line_no) + ": missing value");
            }
            ++table.n_dropped;
            continue;
        }
        values.insert(values.end(), row.begin(), row.end());
        ++n_rows;
    }
    table.values = Matrix(n_rows, d, std::move(values));
    return table;
}

CsvTable read_csv(const std::string& path, std::size_t expected_cols, MissingPolicy policy) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw DataError("csv: cannot open '" + path + "'");
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_csv(buffer.str(), expected_cols, policy);
}

} // namespace evt
