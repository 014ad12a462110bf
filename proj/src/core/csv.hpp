#pragma once

#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace evt {

enum class MissingPolicy {
    DropRow,
    Error,
};

struct CsvTable {
    Matrix values;
    std::vector<std::string> column_names;
    std::size_t n_dropped = 0; // rows removed under MissingPolicy::DropRow
};

// Headered, comma-separated, numeric cells. Empty cells and NA/NaN count as
// missing. expected_cols = 0 accepts any width; otherwise a mismatch is a
// schema error. Parse failures report the 1-based line number.
CsvTable read_csv(const std::string& path, std::size_t expected_cols = 0,
                  MissingPolicy policy = MissingPolicy::DropRow);

CsvTable parse_csv(const std::string& text, std::size_t expected_cols = 0,
                   MissingPolicy policy = MissingPolicy::DropRow);

} // namespace evt
