#include "wht/matrix_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wht/trace_io.hpp"

namespace wht {

namespace {

std::vector<double> parse_line(const std::string& line, std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string cell = line.substr(pos, comma - pos);
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) {
      throw std::runtime_error("empty cell on line " + std::to_string(lineno));
    }
    cell = cell.substr(b, e - b + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
      throw std::runtime_error("bad number '" + cell + "' on line " + std::to_string(lineno));
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

bool skippable(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace

DenseMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    rows.push_back(parse_line(line, lineno));
    if (rows.back().size() != rows.front().size()) {
      throw std::runtime_error("ragged row on line " + std::to_string(lineno));
    }
  }
  if (rows.empty()) throw std::runtime_error("matrix file has no rows");
  DenseMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

DenseMatrix read_matrix_csv(const std::string& path) {
  auto f = open_in(path);
  return read_matrix_csv(f);
}

Vector read_vector_csv(const std::string& path) {
  auto f = open_in(path);
  Vector v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (skippable(line)) continue;
    for (double x : parse_line(line, lineno)) v.push_back(x);
  }
  if (v.empty()) throw std::runtime_error(path + ": no values");
  return v;
}

void write_matrix_csv(const DenseMatrix& m, std::ostream& out) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(std::span<const double> v, std::ostream& out) {
  for (double x : v) out << format_real(x) << '\n';
}

void write_vector_csv(std::span<const double> v, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_vector_csv(v, f);
}

}  // namespace wht
