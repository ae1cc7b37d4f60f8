#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "smg/common.hpp"

namespace smg {

// Sparse sample with strictly increasing 0-based indices and no stored zeros.
// On-disk LIBSVM indices are 1-based; the parser shifts them on input.
struct SparseVector {
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  std::int32_t dim = 0;

  double dot(const Vector& w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * w[indices[k]];
    return s;
  }

  // out += a * x
  void add_scaled(double a, Vector& out) const {
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] += a * values[k];
  }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }

  // Throws unless indices are strictly increasing, inside [0, dim), and all
  // stored values are nonzero.
  void validate() const;
};

// Finite sum F(w) = (1/n) sum_i f(w; i) with certified smoothness and strong
// convexity constants. Component indices are 0-based.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual int n() const = 0;
  virtual int dim() const = 0;
  virtual double component_value(const Vector& w, int i) const = 0;
  virtual void component_grad(const Vector& w, int i, Vector& out) const = 0;

  // L such that every component gradient is L-Lipschitz.
  virtual double smoothness() const = 0;
  // mu >= 0; 0 means merely convex.
  virtual double strong_convexity() const = 0;
  // Closed-form minimizer when the problem class provides one.
  virtual std::optional<Vector> known_minimizer() const { return std::nullopt; }

  Vector component_grad(const Vector& w, int i) const {
    Vector g(dim());
    component_grad(w, i, g);
    return g;
  }

  // Mean value/gradient, accumulated in ascending component order so repeated
  // evaluations are bitwise identical.
  double full_value(const Vector& w) const;
  Vector full_gradient(const Vector& w) const;

 protected:
  void check_dim(const Vector& w) const {
    if (w.size() != dim())
      throw std::invalid_argument("weight dimension " + std::to_string(w.size()) +
                                  " does not match problem dimension " +
                                  std::to_string(dim()));
  }
  void check_index(int i) const {
    if (i < 0 || i >= n())
      throw std::out_of_range("component index " + std::to_string(i) +
                              " outside [0, " + std::to_string(n()) + ")");
  }
};

// f(w; i) = log(1 + exp(-y_i x_i^T w)) + (lambda/2) ||w||^2.
class LogisticProblem : public FiniteSumProblem {
 public:
  LogisticProblem(std::vector<SparseVector> features, std::vector<double> labels,
                  int dim, double lambda);

  int n() const override { return static_cast<int>(features_.size()); }
  int dim() const override { return dim_; }
  using FiniteSumProblem::component_grad;
  double component_value(const Vector& w, int i) const override;
  void component_grad(const Vector& w, int i, Vector& out) const override;
  double smoothness() const override { return max_sq_norm_ / 4.0 + lambda_; }
  double strong_convexity() const override { return lambda_; }

  double lambda() const { return lambda_; }
  const SparseVector& feature(int i) const { return features_[i]; }
  double label(int i) const { return labels_[i]; }

 private:
  std::vector<SparseVector> features_;
  std::vector<double> labels_;  // +1 / -1
  int dim_ = 0;
  double lambda_ = 0.0;
  double max_sq_norm_ = 0.0;
};

// f(w; i) = (1/2) w^T A_i w - b_i^T w with symmetric PSD A_i.
class QuadraticProblem : public FiniteSumProblem {
 public:
  QuadraticProblem(std::vector<Eigen::MatrixXd> A, std::vector<Vector> b);

  int n() const override { return static_cast<int>(A_.size()); }
  int dim() const override { return dim_; }
  using FiniteSumProblem::component_grad;
  double component_value(const Vector& w, int i) const override;
  void component_grad(const Vector& w, int i, Vector& out) const override;
  double smoothness() const override { return L_; }
  double strong_convexity() const override { return mu_; }
  std::optional<Vector> known_minimizer() const override { return minimizer_; }

 private:
  std::vector<Eigen::MatrixXd> A_;
  std::vector<Vector> b_;
  int dim_ = 0;
  double L_ = 0.0;
  double mu_ = 0.0;
  std::optional<Vector> minimizer_;
};

// Same objective with diagonal A_i, stored as vectors; the synthetic generator
// produces these and the per-step gradient cost drops from d^2 to d.
class DiagonalQuadraticProblem : public FiniteSumProblem {
 public:
  DiagonalQuadraticProblem(std::vector<Vector> diag, std::vector<Vector> b);

  int n() const override { return static_cast<int>(diag_.size()); }
  int dim() const override { return dim_; }
  using FiniteSumProblem::component_grad;
  double component_value(const Vector& w, int i) const override;
  void component_grad(const Vector& w, int i, Vector& out) const override;
  double smoothness() const override { return L_; }
  double strong_convexity() const override { return mu_; }
  std::optional<Vector> known_minimizer() const override { return minimizer_; }

 private:
  std::vector<Vector> diag_;
  std::vector<Vector> b_;
  int dim_ = 0;
  double L_ = 0.0;
  double mu_ = 0.0;
  std::optional<Vector> minimizer_;
};

// Constructors mirroring the two supported objective families.
std::shared_ptr<LogisticProblem> logistic_problem(std::vector<SparseVector> features,
                                                  std::vector<double> labels, int dim,
                                                  double lambda);
std::shared_ptr<QuadraticProblem> quadratic_problem(std::vector<Eigen::MatrixXd> A,
                                                    std::vector<Vector> b);

}  // namespace smg
