#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

// Plain-text formats, 0-based indices, single spaces, LF line endings.
//   symmetric:   "dim d"         then one "i j value" per stored pair (i < j)
//   rectangular: "rows n cols k" then one "i j value" per nonzero entry
//   vector:      one value per line
// Parse failures carry the 1-based line number.

SparseSymmetricMatrix read_symmetric(std::istream& in);
SparseSymmetricMatrix read_symmetric_file(const std::string& path);
void write_symmetric(std::ostream& out, const SparseSymmetricMatrix& A);

RectangularMatrix read_rectangular(std::istream& in);
RectangularMatrix read_rectangular_file(const std::string& path);
void write_rectangular(std::ostream& out, const RectangularMatrix& S);

Vector read_vector(std::istream& in);
Vector read_vector_file(const std::string& path);
void write_vector(std::ostream& out, const Vector& v);

// Shortest representation that round-trips a double (up to 17 significant
// digits); all numeric file output goes through this.
std::string format_g17(double x);

}  // namespace gabp
