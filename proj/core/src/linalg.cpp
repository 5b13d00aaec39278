// SPDX-License-Identifier: Apache-2.0
#include "pld/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pld {

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector symmetric_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigen-decomposition failed");
  }
  return solver.eigenvalues();
}

void require_spd(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
  }
  if (!is_symmetric(a, 1e-10)) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
  const double smallest = symmetric_eigenvalues(a)(0);
  if (!(smallest > 0.0)) {
    std::ostringstream msg;
    msg << what << ": matrix is not positive definite (smallest eigenvalue " << smallest << ")";
    throw std::invalid_argument(msg.str());
  }
}

double log_det_spd(const Matrix& a) {
  require_spd(a, "log_det_spd");
  const Vector ev = symmetric_eigenvalues(a);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::log(ev(i));
  return sum;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace pld
