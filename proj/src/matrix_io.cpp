#include "featadapt/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "featadapt/errors.hpp"

namespace featadapt {
namespace {

constexpr std::array<char, 4> kMagic{'S', 'P', 'M', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw FormatError("SPM1: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_spm1(std::ostream& out, const Matrix& a) {
  out.write(kMagic.data(), 4);
  put_u64(out, static_cast<std::uint64_t>(a.rows()));
  put_u64(out, static_cast<std::uint64_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      put_u64(out, std::bit_cast<std::uint64_t>(a(i, j)));
    }
  }
  if (!out) throw FormatError("SPM1: write failed");
}

Matrix read_spm1(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4)) throw FormatError("SPM1: truncated header");
  if (magic != kMagic) throw FormatError("SPM1: bad magic bytes");
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 34;
  if (cols != 0 && rows > kMaxEntries / cols) throw FormatError("SPM1: implausible dimensions");
  Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint64_t j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      try {
        bits = get_u64(in);
      } catch (const FormatError&) {
        throw FormatError("SPM1: truncated payload");
      }
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::bit_cast<double>(bits);
    }
  }
  return a;
}

void write_spm1(const std::string& path, const Matrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_spm1(out, a);
}

Matrix read_spm1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_spm1(in);
}

void write_matrix_csv(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << a(i, j);
    }
    out << '\n';
  }
}

Vector read_vector(const std::string& path) {
  const Matrix a = read_spm1(path);
  if (a.cols() == 1) return a.col(0);
  if (a.rows() == 1) return a.row(0).transpose();
  throw FormatError(path + ": expected a 1 x n or n x 1 matrix");
}

void write_vector(const std::string& path, const Vector& v) { write_spm1(path, Matrix(v)); }

void write_samples(const std::string& path, const SampleSet& s) {
  s.validate();
  Matrix a(s.m(), s.n() + 1);
  a.leftCols(s.n()) = s.X;
  a.col(s.n()) = s.y;
  write_spm1(path, a);
}

SampleSet read_samples(const std::string& path) {
  const Matrix a = read_spm1(path);
  if (a.cols() < 2) throw FormatError(path + ": samples need at least one covariate column plus y");
  SampleSet s;
  s.X = a.leftCols(a.cols() - 1);
  s.y = a.col(a.cols() - 1);
  s.validate();
  return s;
}

}  // namespace featadapt
