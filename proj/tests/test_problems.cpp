#include <doctest.h>

#include "smg/problems.hpp"

using smg::SparseVector;
using smg::Vector;

namespace {

// 1-sample fixture: x = [0.5, 0, -2] stored sparse, y = -1, lambda = 0.1.
std::shared_ptr<smg::LogisticProblem> fixture_logistic() {
  SparseVector x;
  x.indices = {0, 2};
  x.values = {0.5, -2.0};
  x.dim = 3;
  return smg::logistic_problem({x}, {-1.0}, 3, 0.1);
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("sparse vector dot/add/norm against dense arithmetic") {
  SparseVector x;
  x.indices = {1, 3};
  x.values = {2.0, -0.5};
  x.dim = 4;
  x.validate();
  Vector w(4);
  w << 1.0, 2.0, 3.0, 4.0;
  CHECK(x.dot(w) == 2.0 * 2.0 - 0.5 * 4.0);
  CHECK(x.squared_norm() == 4.25);
  Vector out = Vector::Zero(4);
  x.add_scaled(3.0, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 6.0);
  CHECK(out[3] == -1.5);
}

TEST_CASE("sparse vector validation rejects bad layouts") {
  SparseVector x;
  x.dim = 4;
  x.indices = {2, 1};
  x.values = {1.0, 1.0};
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);  // not ascending
  x.indices = {1, 4};
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);  // out of range
  x.indices = {1, 3};
  x.values = {1.0, 0.0};
  CHECK_THROWS_AS(x.validate(), std::invalid_argument);  // stored zero
}

TEST_CASE("logistic value and gradient match the hand-computed fixture") {
  auto problem = fixture_logistic();
  Vector w1 = vec3(0.3, -0.2, 0.7);
  CHECK(problem->component_value(w1, 0) ==
        doctest::Approx(0.28292908134537287).epsilon(1e-15));
  Vector g = problem->component_grad(w1, 0);
  CHECK(g[0] == doctest::Approx(0.14135006941265443).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-0.020000000000000004).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(-0.3754002776506177).epsilon(1e-15));
  // at w = 0 the loss is log 2 regardless of the sample
  CHECK(problem->component_value(Vector::Zero(3), 0) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-16));
  CHECK(problem->smoothness() == 4.25 / 4.0 + 0.1);
  CHECK(problem->strong_convexity() == 0.1);
}

TEST_CASE("logistic gradient agrees with central finite differences") {
  auto problem = fixture_logistic();
  Vector w = vec3(-0.4, 1.2, 0.3);
  Vector g = problem->component_grad(w, 0);
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Vector wp = w, wm = w;
    wp[k] += h;
    wm[k] -= h;
    double fd =
        (problem->component_value(wp, 0) - problem->component_value(wm, 0)) /
        (2.0 * h);
    CHECK(g[k] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("logistic stays finite at extreme margins") {
  auto problem = fixture_logistic();
  Vector w = vec3(1000.0, 0.0, -1000.0);  // margin ~ -2500
  double v = problem->component_value(w, 0);
  CHECK(std::isfinite(v));
  CHECK(problem->component_grad(w, 0).allFinite());
  Vector w2 = vec3(-1000.0, 0.0, 1000.0);  // margin ~ +2500, loss ~ l2 only
  CHECK(problem->component_value(w2, 0) ==
        doctest::Approx(0.05 * w2.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("logistic constructor rejects malformed inputs") {
  SparseVector x;
  x.indices = {0};
  x.values = {1.0};
  x.dim = 2;
  CHECK_THROWS_AS(smg::logistic_problem({x}, {0.5}, 2, 0.0),
                  std::invalid_argument);  // label not +-1
  CHECK_THROWS_AS(smg::logistic_problem({x}, {1.0, -1.0}, 2, 0.0),
                  std::invalid_argument);  // size mismatch
  CHECK_THROWS_AS(smg::logistic_problem({x}, {1.0}, 2, -0.5),
                  std::invalid_argument);  // negative lambda
  CHECK_THROWS_AS(smg::logistic_problem({}, {}, 2, 0.0),
                  std::invalid_argument);  // empty sum
}

TEST_CASE("dense quadratic: values, certified constants, minimizer") {
  Eigen::MatrixXd a1(2, 2), a2(2, 2);
  a1 << 2.0, 0.0, 0.0, 1.0;
  a2 << 1.0, 0.5, 0.5, 1.0;  // eigenvalues 0.5, 1.5
  Vector b1(2), b2(2);
  b1 << 1.0, 0.0;
  b2 << 0.0, 1.0;
  auto problem = smg::quadratic_problem({a1, a2}, {b1, b2});
  CHECK(problem->n() == 2);
  CHECK(problem->dim() == 2);
  Vector w(2);
  w << 2.0, -1.0;
  CHECK(problem->component_value(w, 0) ==
        doctest::Approx(0.5 * (2 * 4.0 + 1.0) - 2.0).epsilon(1e-15));
  Vector g = problem->component_grad(w, 1);
  CHECK(g[0] == doctest::Approx(2.0 - 0.5 - 0.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1.0 - 1.0 - 1.0).epsilon(1e-15));
  CHECK(problem->smoothness() == doctest::Approx(2.0).epsilon(1e-12));
  // mean Hessian = [[1.5, .25], [.25, 1]], smallest eigenvalue > 0
  CHECK(problem->strong_convexity() > 0.0);
  auto w_star = problem->known_minimizer();
  REQUIRE(w_star.has_value());
  CHECK(problem->full_gradient(*w_star).norm() < 1e-10);
}

TEST_CASE("dense quadratic rejects asymmetric or indefinite components") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(smg::quadratic_problem({bad}, {Vector::Zero(2)}),
                  std::invalid_argument);
  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -0.25;
  CHECK_THROWS_AS(smg::quadratic_problem({indef}, {Vector::Zero(2)}),
                  std::invalid_argument);
}

TEST_CASE("diagonal quadratic: oracle minimizer and constants") {
  // the three-component instance used by the optimizer oracle tests
  std::vector<Vector> diag = {vec3(1.0, 2.0, 0).head(2), vec3(2.0, 1.0, 0).head(2),
                              vec3(1.5, 1.5, 0).head(2)};
  std::vector<Vector> b = {vec3(1.0, -1.0, 0).head(2), vec3(0.5, 0.5, 0).head(2),
                           vec3(-1.0, 1.0, 0).head(2)};
  smg::DiagonalQuadraticProblem problem(diag, b);
  auto w_star = problem.known_minimizer();
  REQUIRE(w_star.has_value());
  CHECK((*w_star)[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK((*w_star)[1] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(problem.full_value(*w_star) ==
        doctest::Approx(-0.018518518518518517).epsilon(1e-14));
  CHECK(problem.smoothness() == 2.0);        // largest per-component curvature
  CHECK(problem.strong_convexity() == 1.5);  // smallest mean curvature
  CHECK_THROWS_AS(
      smg::DiagonalQuadraticProblem({vec3(1, -0.5, 0).head(2)},
                                    {Vector::Zero(2)}),
      std::invalid_argument);  // negative curvature entry
}

TEST_CASE("full value and gradient are ascending-order means") {
  auto problem = fixture_logistic();
  Vector w = vec3(0.1, 0.2, 0.3);
  CHECK(problem->full_value(w) == problem->component_value(w, 0));
  CHECK((problem->full_gradient(w) - problem->component_grad(w, 0)).norm() == 0.0);
  // repeated evaluation is bitwise identical
  CHECK(problem->full_value(w) == problem->full_value(w));
}

TEST_CASE("dimension and index guards throw") {
  auto problem = fixture_logistic();
  CHECK_THROWS_AS(problem->component_value(Vector::Zero(2), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(problem->component_value(Vector::Zero(3), 1), std::out_of_range);
  CHECK_THROWS_AS(problem->component_value(Vector::Zero(3), -1), std::out_of_range);
}
