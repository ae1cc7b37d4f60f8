#include "smg/problems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace smg {

void SparseVector::validate() const {
  if (indices.size() != values.size())
    throw std::invalid_argument("sparse vector: index/value count mismatch");
  std::int32_t prev = -1;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] <= prev)
      throw std::invalid_argument("sparse vector: indices not strictly increasing");
    if (indices[k] >= dim)
      throw std::invalid_argument("sparse vector: index " + std::to_string(indices[k]) +
                                  " outside dimension " + std::to_string(dim));
    if (values[k] == 0.0)
      throw std::invalid_argument("sparse vector: stored zero value");
    prev = indices[k];
  }
}

double FiniteSumProblem::full_value(const Vector& w) const {
  check_dim(w);
  double s = 0.0;
  for (int i = 0; i < n(); ++i) s += component_value(w, i);
  return s / n();
}

Vector FiniteSumProblem::full_gradient(const Vector& w) const {
  check_dim(w);
  Vector acc = Vector::Zero(dim());
  Vector g(dim());
  for (int i = 0; i < n(); ++i) {
    component_grad(w, i, g);
    acc += g;
  }
  return acc / n();
}

LogisticProblem::LogisticProblem(std::vector<SparseVector> features,
                                 std::vector<double> labels, int dim, double lambda)
    : features_(std::move(features)), labels_(std::move(labels)), dim_(dim),
      lambda_(lambda) {
  if (features_.empty()) throw std::invalid_argument("logistic: no samples");
  if (features_.size() != labels_.size())
    throw std::invalid_argument("logistic: feature/label count mismatch");
  if (dim_ <= 0) throw std::invalid_argument("logistic: dimension must be positive");
  if (lambda_ < 0.0) throw std::invalid_argument("logistic: negative regularization");
  for (auto& x : features_) {
    if (x.dim != dim_)
      throw std::invalid_argument("logistic: sample dimension mismatch");
    x.validate();
    max_sq_norm_ = std::max(max_sq_norm_, x.squared_norm());
  }
  for (double y : labels_)
    if (y != 1.0 && y != -1.0)
      throw std::invalid_argument("logistic: label must be +1 or -1");
}

double LogisticProblem::component_value(const Vector& w, int i) const {
  check_dim(w);
  check_index(i);
  const double margin = labels_[i] * features_[i].dot(w);
  double v = log1pexp(-margin);
  if (lambda_ > 0.0) v += 0.5 * lambda_ * w.squaredNorm();
  return v;
}

void LogisticProblem::component_grad(const Vector& w, int i, Vector& out) const {
  check_dim(w);
  check_index(i);
  const double margin = labels_[i] * features_[i].dot(w);
  const double s = sigmoid(-margin);  // d/dm log(1+e^{-m}) = -sigmoid(-m)
  if (lambda_ > 0.0)
    out = lambda_ * w;
  else
    out.setZero();
  features_[i].add_scaled(-labels_[i] * s, out);
}

namespace {

// Validates symmetry and positive semidefiniteness; returns (lambda_min, lambda_max).
std::pair<double, double> check_psd(const Eigen::MatrixXd& A, int idx) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("quadratic: A_" + std::to_string(idx) +
                                " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-10 * scale)
    throw std::invalid_argument("quadratic: A_" + std::to_string(idx) +
                                " has a negative eigenvalue");
  return {lo, hi};
}

}  // namespace

QuadraticProblem::QuadraticProblem(std::vector<Eigen::MatrixXd> A,
                                   std::vector<Vector> b)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.empty()) throw std::invalid_argument("quadratic: no components");
  if (A_.size() != b_.size())
    throw std::invalid_argument("quadratic: A/b count mismatch");
  dim_ = static_cast<int>(A_[0].rows());
  Eigen::MatrixXd mean_A = Eigen::MatrixXd::Zero(dim_, dim_);
  Vector mean_b = Vector::Zero(dim_);
  for (std::size_t i = 0; i < A_.size(); ++i) {
    if (A_[i].rows() != dim_ || A_[i].cols() != dim_ || b_[i].size() != dim_)
      throw std::invalid_argument("quadratic: component dimension mismatch");
    const auto [lo, hi] = check_psd(A_[i], static_cast<int>(i));
    (void)lo;
    L_ = std::max(L_, hi);
    mean_A += A_[i];
    mean_b += b_[i];
  }
  mean_A /= static_cast<double>(A_.size());
  mean_b /= static_cast<double>(A_.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mean_A, Eigen::EigenvaluesOnly);
  mu_ = std::max(0.0, es.eigenvalues().minCoeff());
  // Minimizer solves (mean A) w = mean b; kept only when the solve is certified.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mean_A);
  if (ldlt.info() == Eigen::Success) {
    Vector w = ldlt.solve(mean_b);
    const double res = (mean_A * w - mean_b).norm();
    if (res <= 1e-10 * std::max(1.0, mean_b.norm())) minimizer_ = std::move(w);
  }
}

double QuadraticProblem::component_value(const Vector& w, int i) const {
  check_dim(w);
  check_index(i);
  return 0.5 * w.dot(A_[i] * w) - b_[i].dot(w);
}

void QuadraticProblem::component_grad(const Vector& w, int i, Vector& out) const {
  check_dim(w);
  check_index(i);
  out.noalias() = A_[i] * w;
  out -= b_[i];
}

DiagonalQuadraticProblem::DiagonalQuadraticProblem(std::vector<Vector> diag,
                                                   std::vector<Vector> b)
    : diag_(std::move(diag)), b_(std::move(b)) {
  if (diag_.empty()) throw std::invalid_argument("quadratic: no components");
  if (diag_.size() != b_.size())
    throw std::invalid_argument("quadratic: diag/b count mismatch");
  dim_ = static_cast<int>(diag_[0].size());
  Vector mean_diag = Vector::Zero(dim_);
  Vector mean_b = Vector::Zero(dim_);
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    if (diag_[i].size() != dim_ || b_[i].size() != dim_)
      throw std::invalid_argument("quadratic: component dimension mismatch");
    if (diag_[i].minCoeff() < 0.0)
      throw std::invalid_argument("quadratic: A_" + std::to_string(i) +
                                  " has a negative eigenvalue");
    L_ = std::max(L_, diag_[i].maxCoeff());
    mean_diag += diag_[i];
    mean_b += b_[i];
  }
  mean_diag /= static_cast<double>(diag_.size());
  mean_b /= static_cast<double>(diag_.size());
  mu_ = std::max(0.0, mean_diag.minCoeff());
  if (mean_diag.minCoeff() > 0.0)
    minimizer_ = (mean_b.array() / mean_diag.array()).matrix();
}

double DiagonalQuadraticProblem::component_value(const Vector& w, int i) const {
  check_dim(w);
  check_index(i);
  return 0.5 * (w.array().square() * diag_[i].array()).sum() - b_[i].dot(w);
}

void DiagonalQuadraticProblem::component_grad(const Vector& w, int i,
                                              Vector& out) const {
  check_dim(w);
  check_index(i);
  out.array() = diag_[i].array() * w.array() - b_[i].array();
}

std::shared_ptr<LogisticProblem> logistic_problem(std::vector<SparseVector> features,
                                                  std::vector<double> labels, int dim,
                                                  double lambda) {
  return std::make_shared<LogisticProblem>(std::move(features), std::move(labels),
                                           dim, lambda);
}

std::shared_ptr<QuadraticProblem> quadratic_problem(std::vector<Eigen::MatrixXd> A,
                                                    std::vector<Vector> b) {
  return std::make_shared<QuadraticProblem>(std::move(A), std::move(b));
}

}  // namespace smg
