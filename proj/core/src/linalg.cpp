#include "rmlr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rmlr/errors.hpp"

namespace rmlr {

Matrix top_k_subspace(const Matrix& accumulator, int k) {
  const auto d = accumulator.rows();
  if (accumulator.cols() != d) throw std::invalid_argument("top_k_subspace: accumulator must be square");
  if (k < 1 || k > d) throw std::invalid_argument("top_k_subspace: need 1 <= k <= d");
  if (accumulator.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("top_k_subspace: accumulator is all zero");
  }
  const Matrix sym = 0.5 * (accumulator + accumulator.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("top_k_subspace: eigensolver failed");
  // Eigenvalues ascend; take the last k in reverse.
  Matrix u(d, k);
  for (int j = 0; j < k; ++j) {
    Vector col = eig.eigenvectors().col(d - 1 - j);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    u.col(j) = col;
  }
  return u;
}

Matrix second_moment_sum(const Matrix& points, std::span<const int> rows) {
  const auto d = points.cols();
  Matrix acc = Matrix::Zero(d, d);
  if (rows.size() == static_cast<std::size_t>(points.rows())) {
    acc.selfadjointView<Eigen::Lower>().rankUpdate(points.transpose());
  } else {
    Matrix sub(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(sub.transpose());
  }
  return acc.selfadjointView<Eigen::Lower>();
}

Matrix top_k_subspace_of_points(const Matrix& points, int k) {
  const IndexSet rows = all_indices(static_cast<int>(points.rows()));
  return top_k_subspace(second_moment_sum(points, rows), k);
}

Matrix top_k_subspace_of_points(const Matrix& points, std::span<const int> rows, int k) {
  return top_k_subspace(second_moment_sum(points, rows), k);
}

Vector principal_angles(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw std::invalid_argument("principal_angles: shape mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * v);
  Vector sv = svd.singularValues();  // descending
  Vector angles(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) angles(i) = std::acos(std::clamp(sv(i), -1.0, 1.0));
  return angles;
}

double orthogonality_defect(const Matrix& u) {
  const Matrix g = u.transpose() * u - Matrix::Identity(u.cols(), u.cols());
  return g.cwiseAbs().maxCoeff();
}

double nuclear_norm_symmetric(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().sum();
}

IndexSet all_indices(int n) {
  IndexSet idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace rmlr
