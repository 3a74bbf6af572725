#pragma once

// JSON state files:
//   {"dims": [{"label": "A", "dim": 2}, ...], "subnormalized": false,
//    "matrix_re": [[...], ...], "matrix_im": [[...], ...]}
// Rows are listed in order; values are binary64.

#include <string>

#include "disent/qmatrix.hpp"

namespace disent {

/// Throws Error(InvalidFile) naming the offending line or field.
DensityOperator parse_state_json(const std::string& text);
DensityOperator read_state_file(const std::string& path);

std::string state_to_json(const DensityOperator& s);

/// Writes to a temporary sibling file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace disent
