#pragma once

#include <iosfwd>
#include <string>

#include "wht/linalg.hpp"

namespace wht {

// Plain CSV of reals, one matrix row per line, no header. Blank lines and
// lines starting with '#' are skipped.

DenseMatrix read_matrix_csv(std::istream& in);
DenseMatrix read_matrix_csv(const std::string& path);

/// Accepts a single column, a single row, or any mix; values are read in order.
Vector read_vector_csv(const std::string& path);

void write_matrix_csv(const DenseMatrix& m, std::ostream& out);
void write_vector_csv(std::span<const double> v, std::ostream& out);
void write_vector_csv(std::span<const double> v, const std::string& path);

}  // namespace wht
