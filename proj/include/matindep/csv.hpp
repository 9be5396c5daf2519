#pragma once

#include <filesystem>
#include <iosfwd>

#include "matindep/covmodel.hpp"

namespace matindep {

// Comma-separated numeric matrix, one matrix row per line. A single header
// row is skipped when any of its fields fails to parse as a number. Blank
// lines are ignored. Throws DataError on ragged rows or bad fields.
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

// p rows x n columns, column = sample.
DataMatrix read_data_csv(const std::filesystem::path& path);

// Writes values with 17 significant digits so re-reading is exact.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace matindep
