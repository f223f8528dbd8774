#include "helpers.hpp"

#include <doctest.h>

using namespace iclab;

TEST_CASE("task prior has unit expected squared norm") {
  Rng root(11);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Rng r = root.stream(i);
    s += sample_task(r, 5).beta.squaredNorm();
  }
  CHECK(s / n >= 0.98);
  CHECK(s / n <= 1.02);
}

TEST_CASE("one-dimensional task is standard normal") {
  Rng rng(3);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double b = sample_task(rng, 1).beta[0];
    s += b;
    s2 += b * b;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("sampling is deterministic per seed and rejects d = 0") {
  Rng a(42), b(42);
  CHECK(sample_task(a, 4).beta == sample_task(b, 4).beta);
  Rng c(1);
  CHECK_THROWS_AS(sample_task(c, 0), Error);
  try {
    sample_task(c, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("streams are pure functions of seed and index") {
  const Rng root(9);
  Rng s1 = root.stream(17), s2 = root.stream(17), s3 = root.stream(18);
  const double a = s1.normal();
  CHECK(a == s2.normal());
  CHECK(a != s3.normal());
}

TEST_CASE("noiseless sequences interpolate exactly") {
  Rng rng(5);
  const RegressionTask t = sample_task(rng, 6, 0.0);
  const EmbeddedSequence s = sample_sequence(rng, t, 30, CovSpec::isotropic());
  CHECK((s.y - s.X * t.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.yq == s.yq_clean);
  CHECK(s.y.size() == 30);
  CHECK(s.X.rows() == 30);
  CHECK(s.xq.size() == s.X.cols());
}

TEST_CASE("response variance is one plus noise") {
  const Rng root(21);
  const CovSampler cs(CovSpec::isotropic(), 5);
  double s = 0.0, s2 = 0.0;
  long m = 0;
  for (int i = 0; i < 100000; ++i) {
    Rng r = root.stream(i);
    const EmbeddedSequence q = draw_instance(r, 5, 40, 0.1, cs);
    s += q.y.sum();
    s2 += q.y.squaredNorm();
    m += q.y.size();
  }
  const double var = s2 / m - (s / m) * (s / m);
  CHECK(var >= 1.08);
  CHECK(var <= 1.12);
}

TEST_CASE("kms covariates have the requested covariance") {
  const int d = 5;
  const CovSampler cs(CovSpec::kms(0.5), d);
  Rng rng(8);
  MatrixXd acc = MatrixXd::Zero(d, d);
  VectorXd x(d);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    cs.draw(rng, x);
    acc.noalias() += x * x.transpose();
  }
  CHECK((acc / n - kms_matrix(d, 0.5)).norm() <= 0.02);
}

TEST_CASE("embedding places a zero at the query response slot") {
  const EmbeddedSequence s = test::random_sequence(1, 3, 4);
  const MatrixXd Z = embed(s);
  CHECK(Z.rows() == 4);
  CHECK(Z.cols() == 5);
  CHECK(Z(3, 4) == 0.0);
  CHECK(Z.col(4).head(3) == s.xq);
  CHECK(Z.block(0, 0, 3, 4) == s.X.transpose());
}

TEST_CASE("kms inverse has the closed tridiagonal form") {
  const MatrixXd a = kms_inverse_check(5, 0.5);
  CHECK(a(1, 1) == doctest::Approx(1.25));
  CHECK(a(0, 1) == doctest::Approx(-0.5));
  CHECK(std::abs(a(0, 2)) < 1e-12);
  CHECK(a(0, 0) == doctest::Approx(1.0));

  const MatrixXd b = kms_inverse_check(2, 0.5);
  CHECK((b * kms_matrix(2, 0.5) - 0.75 * MatrixXd::Identity(2, 2)).norm() < 1e-12);

  CHECK((kms_inverse_check(6, 1e-9) - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-6);
  for (int d : {1, 3, 17, 50}) CHECK_NOTHROW(kms_inverse_check(d, 0.7));
  CHECK_THROWS_AS(kms_inverse_check(4, 1.0), Error);
  CHECK_THROWS_AS(kms_inverse_check(4, 0.0), Error);
  CHECK_THROWS_AS(CovSpec::kms(-0.2), Error);
}

TEST_CASE("explicit covariance must be symmetric positive definite") {
  MatrixXd s(2, 2);
  s << 1.0, 0.2, 0.3, 1.0;
  CHECK_THROWS_AS(CovSpec::explicit_matrix(s), Error);
  s << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(CovSpec::explicit_matrix(s), Error);
  s << 2.0, 0.5, 0.5, 1.0;
  CHECK(CovSpec::explicit_matrix(s).matrix(2) == s);
  CHECK_THROWS_AS(CovSampler(CovSpec::explicit_matrix(s), 3), Error);
}

TEST_CASE("multitask responses use support-restricted coefficients") {
  TaskSpec spec{1, {{1, 2}}};
  Rng rng(4);
  const MultiTaskSequence s = sample_multitask_sequence(rng, spec, 5, 20, 0.0);
  const VectorXd expect = s.X.leftCols(2) * s.beta.head(2);
  CHECK((s.Y.col(0) - expect).cwiseAbs().maxCoeff() < 1e-14);

  // full support with one task is the single-task model
  Rng r2(4);
  const MultiTaskSequence f = sample_multitask_sequence(r2, TaskSpec::full(3), 3, 10, 0.0);
  CHECK((f.Y.col(0) - f.X * f.beta).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("overlapping supports give positively correlated responses") {
  const TaskSpec spec{2, {{1, 2, 3, 4}, {3, 4, 5, 6}}};
  const Rng root(77);
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Rng r = root.stream(i);
    const MultiTaskSequence s = sample_multitask_sequence(r, spec, 6, 1, 0.1);
    const double a = s.Y(0, 0), b = s.Y(0, 1);
    s1 += a;
    s2 += b;
    s11 += a * a;
    s22 += b * b;
    s12 += a * b;
  }
  const double cov = s12 / n - (s1 / n) * (s2 / n);
  const double corr = cov / std::sqrt((s11 / n - s1 * s1 / n / n) * (s22 / n - s2 * s2 / n / n));
  // analytic value: (2/6) / (4/6 + 0.1) = 0.4348
  CHECK(corr > 0.0);
  CHECK(corr == doctest::Approx(0.4348).epsilon(0.05));
}

TEST_CASE("task specs are validated") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_multitask_sequence(rng, TaskSpec{2, {{1}, {}}}, 3, 4, 0.1), Error);
  CHECK_THROWS_AS(sample_multitask_sequence(rng, TaskSpec{1, {{0, 1}}}, 3, 4, 0.1), Error);
  CHECK_THROWS_AS(sample_multitask_sequence(rng, TaskSpec{1, {{4}}}, 3, 4, 0.1), Error);
  try {
    TaskSpec{2, {{1}, {}}}.validate(3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::spec);
  }
}

TEST_CASE("isotropic data is sign symmetric") {
  // y_1 * x_1[0] * xq[0] is odd under (X, y, xq) -> -(X, y, xq)
  const Rng root(5);
  const CovSampler cs(CovSpec::isotropic(), 4);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Rng r = root.stream(i);
    const EmbeddedSequence q = draw_instance(r, 4, 3, 0.1, cs);
    const double v = q.y[0] * q.X(0, 0) * q.xq[0];
    s += v;
    s2 += v * v;
  }
  const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m) < 3.0 * se);
}

TEST_CASE("truncation keeps the prefix, task and query") {
  const EmbeddedSequence s = test::random_sequence(3, 4, 10);
  const EmbeddedSequence t = truncate(s, 6);
  CHECK(t.L() == 6);
  CHECK(t.X == s.X.topRows(6));
  CHECK(t.y == s.y.head(6));
  CHECK(t.xq == s.xq);
  CHECK(t.yq == s.yq);
  CHECK_THROWS_AS(truncate(s, 11), Error);
}
