#include "gabp/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace gabp {

ParseError::ParseError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

namespace {

// Exact format: single spaces between tokens, LF endings, no blank lines.
std::vector<std::string> split_tokens(const std::string& line, int lineno) {
  if (line.empty()) throw ParseError("blank line", lineno);
  if (line.back() == '\r') throw ParseError("CRLF line ending; expected LF", lineno);
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::string tok =
        next == std::string::npos ? line.substr(pos) : line.substr(pos, next - pos);
    if (tok.empty()) throw ParseError("expected single spaces between tokens", lineno);
    tokens.push_back(tok);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return tokens;
}

int parse_index(const std::string& tok, int lineno) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty() || errno == ERANGE ||
      v > std::numeric_limits<int>::max() || v < std::numeric_limits<int>::min()) {
    throw ParseError("not an integer: '" + tok + "'", lineno);
  }
  return static_cast<int>(v);
}

double parse_value(const std::string& tok, int lineno) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw ParseError("not a number: '" + tok + "'", lineno);
  }
  return v;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn fn) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    fn(line, lineno);
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return in;
}

}  // namespace

SparseSymmetricMatrix read_symmetric(std::istream& in) {
  int dim = -1;
  std::vector<double> diag;
  std::vector<bool> diag_seen;
  std::vector<OffDiagonal> off;
  std::set<std::pair<int, int>> seen;

  for_each_line(in, [&](const std::string& line, int lineno) {
    const std::vector<std::string> tok = split_tokens(line, lineno);
    if (lineno == 1) {
      if (tok.size() != 2 || tok[0] != "dim") {
        throw ParseError("expected header 'dim d'", lineno);
      }
      dim = parse_index(tok[1], lineno);
      if (dim < 1) throw ParseError("dimension must be positive", lineno);
      diag.assign(static_cast<std::size_t>(dim), 0.0);
      diag_seen.assign(static_cast<std::size_t>(dim), false);
      return;
    }
    if (tok.size() != 3) throw ParseError("expected 'i j value'", lineno);
    const int i = parse_index(tok[0], lineno);
    const int j = parse_index(tok[1], lineno);
    const double v = parse_value(tok[2], lineno);
    if (i < 0 || i >= dim || j < 0 || j >= dim) {
      throw ParseError("index out of range for dim " + std::to_string(dim), lineno);
    }
    if (i == j) {
      if (diag_seen[static_cast<std::size_t>(i)]) {
        throw ParseError("duplicate diagonal entry " + std::to_string(i), lineno);
      }
      diag_seen[static_cast<std::size_t>(i)] = true;
      diag[static_cast<std::size_t>(i)] = v;
      return;
    }
    const std::pair<int, int> key{std::min(i, j), std::max(i, j)};
    if (!seen.insert(key).second) {
      throw ParseError("pair (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                           ") stored twice",
                       lineno);
    }
    if (v == 0.0) throw ParseError("explicit zero off-diagonal entry", lineno);
    off.push_back({key.first, key.second, v});
  });
  if (dim < 1) throw ParseError("empty input; expected header 'dim d'", 1);
  std::sort(off.begin(), off.end(),
            [](const OffDiagonal& a, const OffDiagonal& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return SparseSymmetricMatrix(dim, Vector(std::move(diag)), std::move(off));
}

SparseSymmetricMatrix read_symmetric_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_symmetric(in);
}

void write_symmetric(std::ostream& out, const SparseSymmetricMatrix& A) {
  out << "dim " << A.dim() << '\n';
  for (int i = 0; i < A.dim(); ++i) {
    out << i << ' ' << i << ' ' << format_g17(A.diagonal(i)) << '\n';
  }
  for (const OffDiagonal& e : A.off_diagonal()) {
    out << e.i << ' ' << e.j << ' ' << format_g17(e.value) << '\n';
  }
}

RectangularMatrix read_rectangular(std::istream& in) {
  int rows = -1;
  int cols = -1;
  std::vector<double> entries;
  std::set<std::pair<int, int>> seen;

  for_each_line(in, [&](const std::string& line, int lineno) {
    const std::vector<std::string> tok = split_tokens(line, lineno);
    if (lineno == 1) {
      if (tok.size() != 4 || tok[0] != "rows" || tok[2] != "cols") {
        throw ParseError("expected header 'rows n cols k'", lineno);
      }
      rows = parse_index(tok[1], lineno);
      cols = parse_index(tok[3], lineno);
      if (rows < 1 || cols < 1) throw ParseError("rows and cols must be positive", lineno);
      entries.assign(static_cast<std::size_t>(rows) * cols, 0.0);
      return;
    }
    if (tok.size() != 3) throw ParseError("expected 'i j value'", lineno);
    const int i = parse_index(tok[0], lineno);
    const int j = parse_index(tok[1], lineno);
    const double v = parse_value(tok[2], lineno);
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw ParseError("index out of range for " + std::to_string(rows) + "x" +
                           std::to_string(cols),
                       lineno);
    }
    if (!seen.insert({i, j}).second) {
      throw ParseError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") stored twice",
                       lineno);
    }
    entries[static_cast<std::size_t>(i) * cols + j] = v;
  });
  if (rows < 1) throw ParseError("empty input; expected header 'rows n cols k'", 1);
  return RectangularMatrix(rows, cols, std::move(entries));
}

RectangularMatrix read_rectangular_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_rectangular(in);
}

void write_rectangular(std::ostream& out, const RectangularMatrix& S) {
  out << "rows " << S.rows() << " cols " << S.cols() << '\n';
  for (int i = 0; i < S.rows(); ++i) {
    for (int j = 0; j < S.cols(); ++j) {
      if (S(i, j) != 0.0) {
        out << i << ' ' << j << ' ' << format_g17(S(i, j)) << '\n';
      }
    }
  }
}

Vector read_vector(std::istream& in) {
  std::vector<double> values;
  for_each_line(in, [&](const std::string& line, int lineno) {
    const std::vector<std::string> tok = split_tokens(line, lineno);
    if (tok.size() != 1) throw ParseError("expected one value per line", lineno);
    values.push_back(parse_value(tok[0], lineno));
  });
  if (values.empty()) throw ParseError("empty vector", 1);
  return Vector(std::move(values));
}

Vector read_vector_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_vector(in);
}

void write_vector(std::ostream& out, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << format_g17(v[i]) << '\n';
}

std::string format_g17(double x) {
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace gabp
