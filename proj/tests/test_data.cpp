#include <doctest.h>

#include <set>
#include <sstream>

#include "smg/data.hpp"

using smg::Dataset;
using smg::Vector;

TEST_CASE("libsvm parser: labels, indices, comments, implicit zeros") {
  const std::string text =
      "# leading comment\n"
      "+1 1:0.5 3:-2\n"
      "\n"
      "-1 2:1.25 4:0.75  # trailing comment\n"
      "1 2:2\r\n"
      "-1 1:-0.75 3:0 4:2\n";
  Dataset ds = smg::parse_libsvm_string(text);
  REQUIRE(ds.n() == 4);
  CHECK(ds.dim == 4);
  CHECK(ds.labels == std::vector<double>{1.0, -1.0, 1.0, -1.0});
  // indices shift to 0-based
  CHECK(ds.features[0].indices == std::vector<std::int32_t>{0, 2});
  CHECK(ds.features[0].values == std::vector<double>{0.5, -2.0});
  // explicit zero is dropped from storage but still counts toward dim
  CHECK(ds.features[3].indices == std::vector<std::int32_t>{0, 3});
  for (const auto& x : ds.features) CHECK(x.dim == 4);
}

TEST_CASE("libsvm parser: min_dim pads the feature space") {
  Dataset ds = smg::parse_libsvm_string("+1 1:1\n", 10);
  CHECK(ds.dim == 10);
  CHECK(ds.features[0].dim == 10);
}

TEST_CASE("libsvm parser: positive labels map to +1, others to -1") {
  Dataset ds = smg::parse_libsvm_string("3 1:1\n0 1:1\n-2.5 1:1\n");
  CHECK(ds.labels == std::vector<double>{1.0, -1.0, -1.0});
}

TEST_CASE("libsvm parser rejects malformed input with line context") {
  auto fails = [](const std::string& text) {
    CHECK_THROWS_AS(smg::parse_libsvm_string(text), std::runtime_error);
  };
  fails("");                    // no samples
  fails("# only a comment\n");  // still no samples
  fails("abc 1:1\n");           // bad label
  fails("+1 1:\n");             // missing value
  fails("+1 :1\n");             // missing index
  fails("+1 1=1\n");            // no colon
  fails("+1 0:1\n");            // index must be >= 1
  fails("+1 2:1 2:3\n");        // duplicate index
  fails("+1 3:1 2:3\n");        // descending index
  fails("+1 3:0 2:3\n");        // descending even when the zero is dropped
  fails("+1 1.5:1\n");          // fractional index
  try {
    smg::parse_libsvm_string("+1 1:1\nbad 1:1\n");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("serialize/parse round trip is exact") {
  const std::string text = "+1 1:0.1 3:-2.25\n-1 2:1e-3 4:123456.789\n";
  Dataset ds = smg::parse_libsvm_string(text);
  std::string ser = smg::serialize_libsvm(ds);
  Dataset ds2 = smg::parse_libsvm_string(ser);
  REQUIRE(ds2.n() == ds.n());
  CHECK(ds2.dim == ds.dim);
  for (int i = 0; i < ds.n(); ++i) {
    CHECK(ds2.labels[i] == ds.labels[i]);
    CHECK(ds2.features[i].indices == ds.features[i].indices);
    CHECK(ds2.features[i].values == ds.features[i].values);
  }
  CHECK(smg::serialize_libsvm(ds2) == ser);  // fixpoint after one round
}

TEST_CASE("holdout split partitions the dataset deterministically") {
  std::ostringstream text;
  for (int i = 1; i <= 10; ++i)
    text << (i % 2 ? "+1" : "-1") << " 1:" << i << "\n";
  Dataset ds = smg::parse_libsvm_string(text.str());
  auto split = smg::split_dataset(ds, 0.3, 42);
  CHECK(split.test.n() == 3);
  CHECK(split.train.n() == 7);
  CHECK(split.train.dim == ds.dim);
  CHECK(split.test.dim == ds.dim);
  // the union of first-feature values is the original population
  std::multiset<double> seen;
  for (const auto& x : split.train.features) seen.insert(x.values[0]);
  for (const auto& x : split.test.features) seen.insert(x.values[0]);
  CHECK(seen.size() == 10);
  CHECK(*seen.begin() == 1.0);
  CHECK(*seen.rbegin() == 10.0);
  // same seed, same split; the split is a reordering, not a copy
  auto again = smg::split_dataset(ds, 0.3, 42);
  CHECK(smg::serialize_libsvm(again.test) == smg::serialize_libsvm(split.test));
  auto other = smg::split_dataset(ds, 0.3, 43);
  CHECK(smg::serialize_libsvm(other.test) != smg::serialize_libsvm(split.test));
}

TEST_CASE("binary accuracy scores sign agreement with ties as +1") {
  Dataset ds = smg::parse_libsvm_string("+1 1:1\n-1 1:-2\n+1 2:1\n-1 1:1\n");
  Vector w(2);
  w << 1.0, 0.0;  // predicts +1, -1, +1 (tie at 0), -1 is wrong
  CHECK(smg::binary_accuracy(ds, w) == 0.75);
}

TEST_CASE("synthetic quadratic data: determinism and parameter ranges") {
  auto p1 = smg::synth_quadratic_dataset(40, 6, 9, 3.0, 1.0, 1.0);
  auto p2 = smg::synth_quadratic_dataset(40, 6, 9, 3.0, 1.0, 1.0);
  auto p3 = smg::synth_quadratic_dataset(40, 6, 10, 3.0, 1.0, 1.0);
  CHECK(p1->n() == 40);
  CHECK(p1->dim() == 6);
  Vector w = Vector::Constant(6, 0.37);
  for (int i = 0; i < p1->n(); ++i) {
    CHECK(p1->component_value(w, i) == p2->component_value(w, i));  // bitwise
    // curvatures live in [1, condition]
    Vector g0 = p1->component_grad(Vector::Zero(6), i);
    Vector g1 = p1->component_grad(Vector::Ones(6), i);
    for (int k = 0; k < 6; ++k) {
      double curvature = g1[k] - g0[k];
      CHECK(curvature >= 1.0);
      CHECK(curvature <= 3.0);
    }
  }
  CHECK(p1->full_value(w) != p3->full_value(w));  // different seed
  CHECK(p1->strong_convexity() >= 1.0);
  CHECK(p1->smoothness() <= 3.0);
  REQUIRE(p1->known_minimizer().has_value());
  CHECK(p1->full_gradient(*p1->known_minimizer()).norm() < 1e-12);
}

TEST_CASE("synthetic quadratic data: degenerate knobs collapse the spread") {
  // condition 1 and spread 0: every component is 0.5||w||^2 - center.w
  auto p = smg::synth_quadratic_dataset(5, 3, 4, 1.0, 1.0, 0.0);
  auto w_star = p->known_minimizer();
  REQUIRE(w_star.has_value());
  for (int i = 0; i < p->n(); ++i)
    CHECK(p->component_grad(*w_star, i).norm() < 1e-12);  // shared minimizer
}
