#include "helpers.hpp"
#include "iclab/estimators.hpp"
#include "iclab/risk.hpp"

#include <doctest.h>

using namespace iclab;
using test::random_sequence;

TEST_CASE("vanilla GD") {
  const EmbeddedSequence s = random_sequence(1, 5, 40);
  CHECK(vanilla_gd(s, 0.0) == 0.0);
  const EmbeddedSequence one = random_sequence(2, 4, 1);
  CHECK(vanilla_gd(one, 1.0) == doctest::Approx(one.y[0] * one.X.row(0).dot(one.xq)).epsilon(1e-14));

  // rows with X'X = L I / eta recover the noiseless response
  const int d = 3, L = 6;
  const double eta = 0.5;
  EmbeddedSequence o;
  o.X = MatrixXd::Zero(L, d);
  const double c = std::sqrt(static_cast<double>(L) / eta / 2.0);
  for (int j = 0; j < d; ++j) {
    o.X(2 * j, j) = c;
    o.X(2 * j + 1, j) = -c;
  }
  VectorXd beta(d);
  beta << 0.3, -1.2, 0.8;
  o.y = o.X * beta;
  o.xq = VectorXd(d);
  o.xq << 1.0, 0.5, -2.0;
  CHECK(vanilla_gd(o, eta) == doctest::Approx(beta.dot(o.xq)).epsilon(1e-13));
}

TEST_CASE("debiased GD") {
  EmbeddedSequence s = random_sequence(3, 5, 30);
  const double eta = 0.9;
  const double xbar_q = s.X.colwise().mean().dot(s.xq);
  CHECK(debiased_gd(s, eta) == doctest::Approx(vanilla_gd(s, eta) - eta * xbar_q * s.y.mean()).epsilon(1e-12));

  // constant shift of every covariate leaves the centered design unchanged
  EmbeddedSequence t = s;
  VectorXd c(5);
  c << 1.0, -2.0, 0.5, 3.0, 0.0;
  t.X.rowwise() += c.transpose();
  CHECK(debiased_gd(t, eta) == doctest::Approx(debiased_gd(s, eta)).epsilon(1e-11));

  EmbeddedSequence same = s;
  for (int l = 0; l < same.L(); ++l) same.X.row(l) = s.X.row(0);
  CHECK(std::abs(debiased_gd(same, eta)) < 1e-12);
}

TEST_CASE("ridge") {
  const EmbeddedSequence s = random_sequence(4, 5, 40);
  CHECK(std::abs(ridge(s, 1e12)) < 1e-6);
  Rng rng(5);
  const RegressionTask t = sample_task(rng, 5, 0.0);
  const EmbeddedSequence clean = sample_sequence(rng, t, 12, CovSpec::isotropic());
  CHECK(ridge(clean, 0.0) == doctest::Approx(t.beta.dot(clean.xq)).epsilon(1e-10));
  const EmbeddedSequence short_seq = random_sequence(6, 5, 3);
  try {
    ridge(short_seq, 0.0);
    FAIL("expected a linear-algebra error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::linalg);
  }
  CHECK_THROWS_AS(ridge(s, -1.0), Error);
}

TEST_CASE("kernel regressor") {
  const EmbeddedSequence s = random_sequence(7, 5, 40);
  SimplifiedParams p;
  p.omega = VectorXd::Constant(1, 0.37);
  p.mu = VectorXd::Constant(1, 1.4);
  CHECK(kernel_regressor(s, 0.37, 1.4) == doctest::Approx(predict_simplified(p, s)).epsilon(1e-13));
  CHECK(kernel_omega_star(5) == doctest::Approx(0.447214).epsilon(1e-6));
  CHECK(kernel_mu_star(5, 40, 0.1) == doctest::Approx(std::sqrt(5.0) / (1.0 + std::exp(1.0) * 1.1 * 0.125)).epsilon(1e-12));
  CHECK(kernel_mu_star(5, 40, 0.1) == doctest::Approx(1.628).epsilon(1e-3));
}

TEST_CASE("preconditioned GD") {
  const EmbeddedSequence s = random_sequence(8, 5, 40);
  const Preconditioner id(MatrixXd::Identity(5, 5));
  CHECK(preconditioned_gd(s, id, 0.6) == doctest::Approx(vanilla_gd(s, 0.6)).epsilon(1e-13));
  const Preconditioner g = gamma_star(CovSpec::isotropic(), 5, 40, 0.1);
  CHECK((g.gamma - 1.1625 * MatrixXd::Identity(5, 5)).norm() < 1e-14);
  CHECK(preconditioned_gd(s, g) == doctest::Approx(vanilla_gd(s, vgd_optimal_eta(5, 40, 0.1))).epsilon(1e-12));

  MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(Preconditioner{bad}, Error);
  bad << 1.0, 0.1, 0.0, 1.0;
  CHECK_THROWS_AS(Preconditioner{bad}, Error);
}

TEST_CASE("optimal preconditioner") {
  const MatrixXd big = gamma_star(CovSpec::kms(0.5), 5, 10000000, 0.1).gamma;
  CHECK((big - kms_matrix(5, 0.5)).cwiseAbs().maxCoeff() < 1e-5);

  const MatrixXd gi = gamma_star(CovSpec::kms(0.5), 5, 40, 0.1).gamma.inverse();
  const MatrixXd si = kms_matrix(5, 0.5).inverse();
  CHECK(std::abs(si(0, 2)) < 1e-12);
  CHECK(std::abs(gi(0, 2)) > 1e-4);
}

TEST_CASE("estimators are linear in the responses") {
  EmbeddedSequence s = random_sequence(9, 5, 40);
  EmbeddedSequence t = s;
  t.y *= 2.0;
  const Preconditioner g = gamma_star(CovSpec::kms(0.3), 5, 40, 0.1);
  CHECK(vanilla_gd(t, 0.8) == doctest::Approx(2.0 * vanilla_gd(s, 0.8)).epsilon(1e-14));
  CHECK(debiased_gd(t, 0.8) == doctest::Approx(2.0 * debiased_gd(s, 0.8)).epsilon(1e-14));
  CHECK(ridge(t, 0.5) == doctest::Approx(2.0 * ridge(s, 0.5)).epsilon(1e-13));
  CHECK(kernel_regressor(t, 0.4, 1.5) == doctest::Approx(2.0 * kernel_regressor(s, 0.4, 1.5)).epsilon(1e-14));
  CHECK(preconditioned_gd(t, g) == doctest::Approx(2.0 * preconditioned_gd(s, g)).epsilon(1e-13));
}

TEST_CASE("restricted debiased GD uses only the support columns") {
  Rng rng(10);
  const TaskSpec spec{2, {{1, 2}, {2, 3}}};
  MultiTaskSequence m = sample_multitask_sequence(rng, spec, 3, 20, 0.1);
  EmbeddedSequence s;
  s.X = m.X.leftCols(2);
  s.y = m.Y.col(0);
  s.xq = m.xq.head(2);
  CHECK(debiased_gd_support(m, 0, {1, 2}, 0.7) == doctest::Approx(debiased_gd(s, 0.7)).epsilon(1e-13));
  CHECK_THROWS_AS(debiased_gd_support(m, 2, {1}, 0.7), Error);
}

TEST_CASE("risk tournament at the default scale") {
  McSetup mc{5, 40, 0.1, CovSpec::isotropic(), 100000, 31, 1};
  const double es = 1.0 / (1.0 + 1.1 * 5.0 / 40.0);
  const double w = kernel_omega_star(5), m = kernel_mu_star(5, 40, 0.1);
  const PairedRisk r = paired_risks({[&](const EmbeddedSequence& s) { return ridge(s, 0.5); },
                                     [&](const EmbeddedSequence& s) { return debiased_gd(s, es); },
                                     [&](const EmbeddedSequence& s) { return vanilla_gd(s, vgd_optimal_eta(5, 40, 0.1)); },
                                     [&](const EmbeddedSequence& s) { return kernel_regressor(s, w, m); }},
                                    mc);
  // ridge at the Bayes penalty beats every other estimator
  for (int j = 1; j < 4; ++j) CHECK(r.z(0, j) < -3.0);
  // single-head kernel optimum loses to debiased GD by a margin
  CHECK(r.risks[3].mean - r.risks[1].mean >= 0.02);
  // debiased GD at eta* sits within the O(1/L) gap of the closed-form vanilla risk
  const double gap = (5 * 1.1 + 2 + 80) / 1600.0 + 2 * es * (5 * 1.1 + 41) / 1600.0;
  CHECK(std::abs(r.risks[1].mean - vgd_risk_closed(vgd_optimal_eta(5, 40, 0.1), 5, 40, 0.1)) <=
        gap + 3 * r.risks[1].std_error);
}
