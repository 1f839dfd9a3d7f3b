#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "spdekit/error.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {
namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  const bool symmetric = m.is_symmetric();
  std::size_t count = 0;
  if (symmetric) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j : m.row_cols(i))
        if (j <= i) ++count;
  } else {
    count = m.nnz();
  }
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << count << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    auto cols = m.row_cols(i);
    auto vals = m.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (symmetric && cols[p] > i) continue;
      out << (i + 1) << ' ' << (cols[p] + 1) << ' ' << format_real(vals[p]) << '\n';
    }
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  write_matrix_market(out, m);
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::MalformedLine,
          "line 1: empty MatrixMarket input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  require(banner == "%%MatrixMarket" && object == "matrix" && format == "coordinate",
          ErrorKind::MalformedLine, "line 1: expected '%%MatrixMarket matrix coordinate'");
  require(field == "real" || field == "integer", ErrorKind::MalformedLine,
          "line 1: only real/integer fields are supported");
  require(symmetry == "general" || symmetry == "symmetric", ErrorKind::MalformedLine,
          "line 1: only general/symmetric storage is supported");
  const bool symmetric = symmetry == "symmetric";

  std::size_t line_no = 1;
  long rows = -1, cols = -1, count = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream s(line);
    require(static_cast<bool>(s >> rows >> cols >> count), ErrorKind::MalformedLine,
            "line " + std::to_string(line_no) + ": bad size line");
    break;
  }
  require(rows >= 0 && cols >= 0 && count >= 0, ErrorKind::MalformedLine, "missing size line");

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(symmetric ? 2 * count : count));
  long seen = 0;
  while (seen < count && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream s(line);
    long i = 0, j = 0;
    double v = 0.0;
    require(static_cast<bool>(s >> i >> j >> v), ErrorKind::MalformedLine,
            "line " + std::to_string(line_no) + ": expected 'row col value'");
    require(i >= 1 && i <= rows && j >= 1 && j <= cols, ErrorKind::IndexOutOfRange,
            "line " + std::to_string(line_no) + ": index out of range");
    t.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (symmetric && i != j) t.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    ++seen;
  }
  require(seen == count, ErrorKind::MalformedLine, "fewer entries than declared");
  return SparseMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), t);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + path);
  return read_matrix_market(in);
}

}  // namespace spdekit
