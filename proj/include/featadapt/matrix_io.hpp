#pragma once

#include <iosfwd>
#include <string>

#include "featadapt/linalg.hpp"

namespace featadapt {

// SPM1 layout: "SPM1", rows (u64 LE), cols (u64 LE), rows*cols f64 LE, row-major.
void write_spm1(std::ostream& out, const Matrix& a);
Matrix read_spm1(std::istream& in);

void write_spm1(const std::string& path, const Matrix& a);
Matrix read_spm1(const std::string& path);

// Human-readable mirror of the same data, full round-trip precision.
void write_matrix_csv(const std::string& path, const Matrix& a);

// Vectors travel as n x 1 matrices; either orientation is accepted on read.
Vector read_vector(const std::string& path);
void write_vector(const std::string& path, const Vector& v);

// Samples travel as one m x (n+1) matrix whose last column is y.
void write_samples(const std::string& path, const SampleSet& s);
SampleSet read_samples(const std::string& path);

}  // namespace featadapt
