#include "levsample/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace levsample {

static_assert(std::endian::native == std::endian::little,
              "binary matrix format assumes a little-endian host");

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

double parse_double(std::string_view text, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IoError("matrix CSV line " + std::to_string(line) + ": bad number '" +
                  std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out = open_out(path);
  write_matrix_csv(out, m);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DenseMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("matrix CSV: missing header");
  const auto header = split_commas(line);
  if (header.size() != 2) throw IoError("matrix CSV line 1: expected 'n,p'");
  const double rows = parse_double(header[0], 1);
  const double cols = parse_double(header[1], 1);
  if (rows < 1 || cols < 1 || rows != std::floor(rows) || cols != std::floor(cols)) {
    throw IoError("matrix CSV line 1: dimensions must be positive integers");
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < m.rows(); ++i) {
    const auto line_no = static_cast<std::size_t>(i + 2);
    if (!std::getline(in, line)) {
      throw IoError("matrix CSV: expected " + std::to_string(m.rows()) + " rows, got " +
                    std::to_string(i));
    }
    const auto fields = split_commas(line);
    if (static_cast<Index>(fields.size()) != m.cols()) {
      throw IoError("matrix CSV line " + std::to_string(line_no) + ": expected " +
                    std::to_string(m.cols()) + " values");
    }
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = parse_double(fields[static_cast<std::size_t>(j)], line_no);
  }
  return m;
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_matrix_csv(in);
}

void write_matrix_binary(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out = open_out(path, std::ios::binary);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DenseMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::uint64_t dims[2] = {0, 0};
  if (!in.read(reinterpret_cast<char*>(dims), sizeof(dims))) {
    throw IoError("binary matrix '" + path.string() + "': truncated header");
  }
  if (dims[0] < 1 || dims[1] < 1 || dims[0] > (1ULL << 32) || dims[1] > (1ULL << 32)) {
    throw IoError("binary matrix '" + path.string() + "': implausible dimensions");
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
  if (!in.read(reinterpret_cast<char*>(rm.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())))) {
    throw IoError("binary matrix '" + path.string() + "': truncated data");
  }
  return rm;
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? read_matrix_binary(path) : read_matrix_csv(path);
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v) {
  write_matrix_csv(path, DenseMatrix(v));
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const DenseMatrix m = read_matrix_csv(path);
  if (m.cols() != 1) throw IoError("'" + path.string() + "': expected a single column");
  return m.col(0);
}

void write_scores_csv(std::ostream& out, const Vector& scores) {
  out << "index,score\n";
  for (Index i = 0; i < scores.size(); ++i) out << i << ',' << format_double(scores(i)) << '\n';
}

}  // namespace levsample
