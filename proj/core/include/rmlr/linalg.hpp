#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace rmlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sorted list of row indices into a point matrix.
using IndexSet = std::vector<int>;

/// Top-k eigenvectors of a symmetric d x d accumulator, eigenvalue
/// descending. Each column is normalised so that its largest-magnitude
/// entry is positive. Throws NumericalError if the accumulator is all zero.
Matrix top_k_subspace(const Matrix& accumulator, int k);

/// Top-k subspace of sum_i p_i p_i^T over the rows of `points`.
Matrix top_k_subspace_of_points(const Matrix& points, int k);

/// Same, restricted to the rows listed in `rows`.
Matrix top_k_subspace_of_points(const Matrix& points, std::span<const int> rows, int k);

/// sum_{i in rows} p_i p_i^T.
Matrix second_moment_sum(const Matrix& points, std::span<const int> rows);

/// Principal angles (radians, ascending) between the column spans of two
/// semi-orthogonal matrices with the same number of columns.
Vector principal_angles(const Matrix& u, const Matrix& v);

/// max |U^T U - I| entrywise.
double orthogonality_defect(const Matrix& u);

/// Nuclear norm of a symmetric matrix (sum of |eigenvalues|).
double nuclear_norm_symmetric(const Matrix& a);

IndexSet all_indices(int n);

}  // namespace rmlr
