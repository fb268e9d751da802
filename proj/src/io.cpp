#include "coreset/io.hpp"

#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <vector>

namespace coreset {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw InvalidInput("line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
    }
    for (std::size_t k = used; k < cell.size(); ++k) {
      if (!std::isspace(static_cast<unsigned char>(cell[k]))) {
        throw InvalidInput("line " + std::to_string(line_no) + ": trailing text in '" + cell + "'");
      }
    }
    if (!std::isfinite(v)) throw InvalidInput("line " + std::to_string(line_no) + ": non-finite value");
    vals.push_back(v);
  }
  return vals;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return in;
}

}  // namespace

Matrix parse_matrix(std::istream& in, bool header_required) {
  static const std::regex header(R"(#\s*rows\s*=\s*(\d+)\s+cols\s*=\s*(\d+)\s*)");
  std::string line;
  long want_rows = -1;
  long want_cols = -1;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      std::smatch m;
      if (rows.empty() && want_rows < 0 && std::regex_match(line, m, header)) {
        want_rows = std::stol(m[1]);
        want_cols = std::stol(m[2]);
      }
      continue;
    }
    rows.push_back(parse_row(line, line_no));
  }
  if (header_required && want_rows < 0) throw InvalidInput("missing '# rows=<n> cols=<d>' header");
  const long n = static_cast<long>(rows.size());
  const long d = rows.empty() ? std::max(want_cols, 0L) : static_cast<long>(rows.front().size());
  if (want_rows >= 0 && (want_rows != n || want_cols != d)) {
    throw DimensionMismatch("header says " + std::to_string(want_rows) + "x" + std::to_string(want_cols) +
                            " but file has " + std::to_string(n) + "x" + std::to_string(d));
  }
  Matrix m(n, d);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(rows[static_cast<std::size_t>(i)].size()) != d) {
      throw DimensionMismatch("row " + std::to_string(i) + " has inconsistent width");
    }
    for (long j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix read_matrix(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_matrix(in, true);
}

Matrix read_stream(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_matrix(in, false);
}

Vector read_vector(const std::string& path) {
  auto in = open_or_throw(path);
  Matrix m = parse_matrix(in, false);
  if (m.cols() != 1) throw DimensionMismatch("label file must have exactly one column");
  return m.col(0);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  write_matrix(out, m);
}

}  // namespace coreset
