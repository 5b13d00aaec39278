// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace pld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetry check: max |A - A^T| <= rel_tol * max(1, max |A|).
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& a);

/// Throws std::invalid_argument naming `what` if `a` is not square and
/// symmetric, or if its smallest eigenvalue is not strictly positive.
void require_spd(const Matrix& a, std::string_view what);

/// log det of an SPD matrix, accumulated as a sum of log-eigenvalues.
double log_det_spd(const Matrix& a);

/// Symmetric part (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

}  // namespace pld
