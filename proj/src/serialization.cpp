#include "retc/serialization.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace retc {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& os, const std::string& name,
                  const Eigen::MatrixXd& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j)
      os << (j ? " " : "") << format_real(m(i, j));
    os << '\n';
  }
}

void write_polytope(std::ostream& os, const std::string& name,
                    const Polytope& p) {
  os << "polytope " << name << " dim " << p.dim() << " facets "
     << (p.has_hrep() ? p.halfspaces().size() : 0) << '\n';
  if (p.has_hrep()) {
    for (const auto& h : p.halfspaces()) {
      for (int i = 0; i < h.normal.size(); ++i)
        os << format_real(h.normal(i)) << ' ';
      os << format_real(h.offset) << '\n';
    }
  }
  os << "vertices " << (p.has_vrep() ? p.vertices().size() : 0) << '\n';
  if (p.has_vrep()) {
    for (const auto& v : p.vertices()) {
      for (int i = 0; i < v.size(); ++i)
        os << (i ? " " : "") << format_real(v(i));
      os << '\n';
    }
  }
}

std::string TokenReader::next() {
  if (has_lookahead_) {
    has_lookahead_ = false;
    return std::move(lookahead_);
  }
  std::string token;
  if (!(is_ >> token)) throw std::runtime_error("unexpected end of record");
  return token;
}

std::string TokenReader::peek() {
  if (!has_lookahead_) {
    if (!(is_ >> lookahead_)) return "";
    has_lookahead_ = true;
  }
  return lookahead_;
}

bool TokenReader::at_end() { return peek().empty(); }

void TokenReader::expect(const std::string& token) {
  std::string got = next();
  if (got != token)
    throw std::runtime_error("expected '" + token + "', found '" + got + "'");
}

double TokenReader::next_real() {
  std::string token = next();
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("expected a real number, found '" + token + "'");
  }
}

long TokenReader::next_int() {
  std::string token = next();
  try {
    std::size_t used = 0;
    long v = std::stol(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("expected an integer, found '" + token + "'");
  }
}

Eigen::MatrixXd read_matrix(TokenReader& reader, const std::string& name) {
  reader.expect("matrix");
  reader.expect(name);
  long rows = reader.next_int();
  long cols = reader.next_int();
  if (rows < 0 || cols < 0 || rows > 64 || cols > 64)
    throw std::runtime_error("matrix " + name + ": implausible dimensions");
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = reader.next_real();
  return m;
}

Polytope read_polytope(TokenReader& reader, const std::string& name) {
  reader.expect("polytope");
  reader.expect(name);
  reader.expect("dim");
  long dim = reader.next_int();
  reader.expect("facets");
  long facet_count = reader.next_int();
  if (dim < 1 || dim > 3 || facet_count < 0)
    throw std::runtime_error("polytope " + name + ": implausible header");
  std::vector<Halfspace> facets;
  facets.reserve(facet_count);
  for (long f = 0; f < facet_count; ++f) {
    Eigen::VectorXd normal(dim);
    for (long i = 0; i < dim; ++i) normal(i) = reader.next_real();
    double offset = reader.next_real();
    facets.push_back({normal, offset});
  }
  reader.expect("vertices");
  long vertex_count = reader.next_int();
  for (long v = 0; v < vertex_count; ++v)
    for (long i = 0; i < dim; ++i) reader.next_real();  // informational only
  // Rebuild from the facet list so both representations are synchronized.
  return intersect_halfspaces(static_cast<int>(dim), std::move(facets));
}

}  // namespace retc
