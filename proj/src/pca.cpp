#include "puprior/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "puprior/errors.hpp"

namespace puprior {

PcaResult zscore_pca(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) throw InvalidInputError("need at least two points");
  if (k < 1) throw InvalidInputError("k must be at least 1");
  if (k > d) throw InvalidInputError("k exceeds the number of columns");

  const Eigen::RowVectorXd mean = points.colwise().mean();
  Eigen::MatrixXd centered = points.rowwise() - mean;
  Eigen::RowVectorXd sd =
      (centered.array().square().colwise().sum() / double(n - 1)).sqrt();

  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (sd(j) > 1e-12 * (1.0 + std::abs(mean(j)))) kept.push_back(j);
  }
  if (kept.empty()) throw InvalidInputError("all columns have zero variance");

  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    z.col(static_cast<Eigen::Index>(j)) =
        centered.col(kept[j]) / sd(kept[j]);
  }

  const Eigen::MatrixXd cov = (z.transpose() * z) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw EstimationFailedError("eigendecomposition failed");
  }
  const Eigen::VectorXd eigenvalues = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd eigenvectors = solver.eigenvectors();
  const Eigen::Index kd = eigenvalues.size();

  const double lambda_max = std::max(eigenvalues(kd - 1), 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < kd; ++j) {
    if (eigenvalues(j) > 1e-12 * std::max(lambda_max, 1.0)) ++rank;
  }

  PcaResult result;
  result.k_used = static_cast<int>(std::min<Eigen::Index>(k, rank));
  result.k_reduced = result.k_used < k;
  if (result.k_used == 0) throw InvalidInputError("data has rank zero");

  const double total_var = std::max(eigenvalues.sum(), 1e-300);
  Eigen::MatrixXd basis(kd, result.k_used);
  result.explained.resize(result.k_used);
  for (int j = 0; j < result.k_used; ++j) {
    const Eigen::Index src = kd - 1 - j;  // descending eigenvalue order
    Eigen::VectorXd vec = eigenvectors.col(src);
    Eigen::Index arg_max = 0;
    vec.cwiseAbs().maxCoeff(&arg_max);
    if (vec(arg_max) < 0.0) vec = -vec;
    basis.col(j) = vec;
    result.explained(j) = eigenvalues(src) / total_var;
  }
  result.projected = z * basis;
  return result;
}

}  // namespace puprior
