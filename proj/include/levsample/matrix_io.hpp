#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "levsample/core.hpp"

namespace levsample {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Headered CSV: first line "n,p", then n lines of p comma-separated values.
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(std::istream& in);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

/// Little-endian binary: uint64 n, uint64 p, then n * p float64 values row-major.
void write_matrix_binary(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_binary(const std::filesystem::path& path);

/// Binary when the extension is .bin, headered CSV otherwise.
DenseMatrix read_matrix(const std::filesystem::path& path);

/// Vectors use the matrix CSV format with a single column.
void write_vector_csv(const std::filesystem::path& path, const Vector& v);
Vector read_vector_csv(const std::filesystem::path& path);

/// "index,score" header followed by one row per score.
void write_scores_csv(std::ostream& out, const Vector& scores);

}  // namespace levsample
