#include <doctest.h>

#include <cmath>

#include "mfmrasch/error.hpp"
#include "mfmrasch/model.hpp"
#include "mfmrasch/random.hpp"

using namespace mfmrasch;

namespace {

ResponseMatrix coin_flips(Rng& rng, int n, int j) {
  Eigen::MatrixXi y(n, j);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < j; ++k) y(i, k) = sample_uniform(rng) < 0.5 ? 1 : 0;
  }
  return make_response_matrix(y);
}

RaschParams random_params(Rng& rng, int n, int j) {
  RaschParams p{Eigen::VectorXd(n), Eigen::VectorXd(j)};
  for (int i = 0; i < n; ++i) p.theta(i) = sample_normal(rng, 0.0, 1.5);
  for (int k = 0; k < j; ++k) p.b(k) = sample_normal(rng, 0.0, 1.5);
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("rasch probability") {
  CHECK(rasch_prob(0.0, 0.0) == 0.5);
  CHECK(rasch_prob(2.0, 2.0) == 0.5);
  CHECK(rasch_prob(2.0, 0.0) == doctest::Approx(0.8807970779778823).epsilon(1e-15));
  CHECK(rasch_prob(-800.0, 0.0) >= 0.0);
  CHECK(rasch_prob(800.0, 0.0) == 1.0);
  CHECK(std::isfinite(bernoulli_logit_log_prob(0, 800.0)));
  CHECK(bernoulli_logit_log_prob(0, 800.0) == doctest::Approx(-800.0));
}

TEST_CASE("log likelihood") {
  Eigen::MatrixXi y(2, 3);
  y << 1, 0, 1, 0, 0, 1;
  const auto data = make_response_matrix(y);
  const RaschParams equal{Eigen::VectorXd::Constant(2, 0.3), Eigen::VectorXd::Constant(3, 0.3)};
  CHECK(log_likelihood(data, equal) == doctest::Approx(-4.1588830833596715).epsilon(1e-14));
  CHECK(log_likelihood(data, equal) == doctest::Approx(6.0 * std::log(0.5)).epsilon(1e-14));

  // N=1, J=1 is below the container minimum, so embed it: one informative cell.
  Eigen::MatrixXi y1(2, 2);
  y1 << 1, 0, 0, 0;
  const auto d1 = make_response_matrix(y1);
  RaschParams p{Eigen::Vector2d(2.0, 0.0), Eigen::Vector2d(0.0, 0.0)};
  const double rest = bernoulli_logit_log_prob(0, 2.0) + 2.0 * std::log(0.5);
  CHECK(log_likelihood(d1, p) - rest == doctest::Approx(-0.12692801104297263).epsilon(1e-13));

  Rng rng(5);
  const auto data_r = coin_flips(rng, 7, 5);
  auto params = random_params(rng, 7, 5);
  const double base = log_likelihood(data_r, params);
  params.theta.array() += 1.7;
  params.b.array() += 1.7;
  CHECK(log_likelihood(data_r, params) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("subject likelihood factorisation") {
  Eigen::MatrixXi y(2, 2);
  y << 1, 0, 0, 1;
  const auto data = make_response_matrix(y);
  const RaschParams zero{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  CHECK(subject_likelihood(data, 0, zero).prob == doctest::Approx(0.25).epsilon(1e-15));

  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = coin_flips(rng, 6, 4);
    const auto p = random_params(rng, 6, 4);
    double sum_log = 0.0;
    double prod = 1.0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      const auto s = subject_likelihood(d, i, p);
      double row = 0.0;
      for (Eigen::Index j = 0; j < 4; ++j) row += bernoulli_logit_log_prob(d.responses(i, j), p.theta(i) - p.b(j));
      CHECK(std::exp(row) == doctest::Approx(s.prob).epsilon(1e-12));
      CHECK(s.log_prob == doctest::Approx(row).epsilon(1e-12));
      sum_log += s.log_prob;
      prod *= s.prob;
    }
    CHECK(prod == doctest::Approx(std::exp(log_likelihood(d, p))).epsilon(1e-12));
    CHECK(subject_log_likelihoods(d, p).sum() == doctest::Approx(sum_log).epsilon(1e-12));
  }
}

TEST_CASE("probability matrix and dimension checks") {
  const RaschParams p{Eigen::Vector2d(1.0, -1.0), Eigen::Vector3d(0.0, 1.0, -1.0)};
  const Eigen::MatrixXd m = probability_matrix(p);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(0, 1) == 0.5);
  CHECK(m(1, 0) == doctest::Approx(rasch_prob(-1.0, 0.0)));
  const auto data = make_response_matrix(Eigen::MatrixXi::Zero(3, 3));
  CHECK_THROWS_AS(log_likelihood(data, p), ConfigError);
}

}
