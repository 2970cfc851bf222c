#pragma once

#include <string>
#include <vector>

#include "dwl/matrix.hpp"

namespace dwl {

// Binary matrix file: magic "DWLM", 1-byte version = 1, u64 LE rows,
// u64 LE cols, then rows*cols f64 LE values, row-major. Round-trips
// bit-exactly.
void write_dwlm(const RealMatrix& m, const std::string& path);
RealMatrix read_dwlm(const std::string& path);

// CSV mirror of a matrix: no header, 17 significant digits, one row per line.
void write_matrix_csv(const RealMatrix& m, const std::string& path);
RealMatrix read_matrix_csv(const std::string& path);

// One label per line under a "label" header.
void write_labels_csv(const std::vector<int>& labels, const std::string& path);
std::vector<int> read_labels_csv(const std::string& path);

}  // namespace dwl
