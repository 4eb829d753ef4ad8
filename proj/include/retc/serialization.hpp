#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

#include "retc/polytope.hpp"

namespace retc {

// Text records for matrices and polytopes: whitespace-separated tokens,
// reals at 17 significant digits (lossless double round trip).

std::string format_real(double v);

void write_matrix(std::ostream& os, const std::string& name,
                  const Eigen::MatrixXd& m);
void write_polytope(std::ostream& os, const std::string& name,
                    const Polytope& p);

// Pull-based token reader with one-token lookahead.
class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  std::string next();
  std::string peek();
  bool at_end();
  void expect(const std::string& token);
  double next_real();
  long next_int();

 private:
  std::istream& is_;
  std::string lookahead_;
  bool has_lookahead_ = false;
};

// Counterparts of the writers; the leading keyword/name must already match.
Eigen::MatrixXd read_matrix(TokenReader& reader, const std::string& name);
Polytope read_polytope(TokenReader& reader, const std::string& name);

}  // namespace retc
