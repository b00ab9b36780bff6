#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mfmrasch/error.hpp"
#include "mfmrasch/prior.hpp"
#include "stat_checks.hpp"

using namespace mfmrasch;

TEST_SUITE("prior") {

TEST_CASE("mfm weights at tiny lambda") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto d = sample_mfm_weights(MfmConfig{1.0, 1e-12}, rng);
    REQUIRE(d.k == 1);
    CHECK(d.weights.size() == 1);
    CHECK(d.weights(0) == 1.0);
  }
}

TEST_CASE("mfm weights at lambda 1") {
  Rng rng(2);
  const int n = 100000;
  int k1 = 0;
  double k_sum = 0.0;
  double worst = 0.0;
  bool positive = true;
  for (int t = 0; t < n; ++t) {
    const auto d = sample_mfm_weights(MfmConfig{}, rng);
    k1 += d.k == 1;
    k_sum += d.k;
    worst = std::max(worst, std::abs(d.weights.sum() - 1.0));
    positive = positive && (d.weights.array() > 0.0).all();
    REQUIRE(d.weights.size() == d.k);
  }
  CHECK(std::abs(k1 / double(n) - std::exp(-1.0)) <= 0.01);
  CHECK(std::abs(k_sum / n - 2.0) <= 0.02);
  CHECK(worst <= 1e-12);
  CHECK(positive);
}

TEST_CASE("spacings construction rejects gamma != 1") {
  Rng rng(3);
  CHECK_THROWS_AS(sample_mfm_weights(MfmConfig{0.5, 1.0}, rng), ConfigError);
  CHECK_NOTHROW(sample_mfm_weights_general(MfmConfig{0.5, 1.0}, rng));
}

TEST_CASE("first weight is uniform when K = 2") {
  Rng rng(4);
  std::vector<double> w1;
  while (w1.size() < 10000) {
    const auto d = sample_mfm_weights_general(MfmConfig{}, rng);
    if (d.k == 2) w1.push_back(d.weights(0));
  }
  const double p = stat_checks::ks_pvalue(w1, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(p > 0.01);
}

TEST_CASE("both constructions agree") {
  Rng rng(5);
  const int n = 100000;
  double k_a = 0.0, k_b = 0.0, max_a = 0.0, max_b = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto a = sample_mfm_weights(MfmConfig{}, rng);
    const auto b = sample_mfm_weights_general(MfmConfig{}, rng);
    k_a += a.k;
    k_b += b.k;
    max_a += a.weights.maxCoeff();
    max_b += b.weights.maxCoeff();
  }
  CHECK(std::abs(k_a - k_b) / n <= 0.02);
  CHECK(std::abs(max_a - max_b) / n <= 0.02);
  CHECK(std::abs(k_b / n - 2.0) <= 0.02);
}

TEST_CASE("stick breaking") {
  const Eigen::VectorXd w = stick_breaking_weights(Eigen::Vector3d(0.5, 0.5, 0.3));
  CHECK(w(0) == 0.5);
  CHECK(w(1) == 0.25);
  CHECK(w(2) == 0.25);  // last stick takes the remainder

  Rng rng(6);
  int near_one = 0;
  for (int t = 0; t < 1000; ++t) near_one += sample_dp_weights(DpConfig{1e-6, 20}, rng)(0) > 0.999;
  CHECK(near_one >= 995);

  const int n = 100000;
  double first = 0.0;
  double worst = 0.0;
  bool nonneg = true;
  for (int t = 0; t < n; ++t) {
    const auto dw = sample_dp_weights(DpConfig{}, rng);
    first += dw(0);
    worst = std::max(worst, std::abs(dw.sum() - 1.0));
    nonneg = nonneg && (dw.array() >= 0.0).all();
  }
  CHECK(std::abs(first / n - 0.5) <= 0.01);
  CHECK(worst <= 1e-12);
  CHECK(nonneg);
}

TEST_CASE("K pmf") {
  CHECK(log_k_pmf(1.0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(log_k_pmf(1.0, 3) == doctest::Approx(-1.6931471805599454).epsilon(1e-14));
  double total = 0.0;
  for (int k = 1; k <= 50; ++k) total += std::exp(log_k_pmf(1.0, k));
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK_THROWS_AS(log_k_pmf(1.0, 0), ConfigError);

  Rng rng(7);
  std::vector<int> ks;
  for (int t = 0; t < 20000; ++t) ks.push_back(sample_k(1.5, rng));
  const double p = stat_checks::chi_square_pvalue(ks, [](int k) { return std::exp(log_k_pmf(1.5, k)); }, 1, 12);
  CHECK(p > 0.001);
}

TEST_CASE("hyperpriors") {
  Rng rng(8);
  const int n = 100000;
  std::vector<double> ln(n);
  double g = 0.0;
  bool in_unit = true;
  const auto ln_prior = HyperPrior::parse("log_normal(0,1)");
  const auto g_prior = HyperPrior::parse("gamma(100,1)");
  const auto u_prior = HyperPrior::parse("uniform(0,1)");
  for (int t = 0; t < n; ++t) {
    ln[t] = sample_hyperprior(ln_prior, rng);
    g += sample_hyperprior(g_prior, rng);
    const double u = sample_hyperprior(u_prior, rng);
    in_unit = in_unit && u > 0.0 && u < 1.0;
  }
  std::nth_element(ln.begin(), ln.begin() + n / 2, ln.end());
  CHECK(std::abs(ln[n / 2] - 1.0) <= 0.02);
  CHECK(std::abs(g / n - 100.0) <= 1.0);
  CHECK(in_unit);
}

TEST_CASE("hyperprior text and densities") {
  CHECK(HyperPrior::parse("Gamma(1, 1)") == HyperPrior::gamma(1.0, 1.0));
  CHECK(HyperPrior::parse("lognormal(0,1)") == HyperPrior::log_normal(0.0, 1.0));
  CHECK(HyperPrior::parse("unif(0,1)") == HyperPrior::uniform(0.0, 1.0));
  CHECK(HyperPrior::parse(HyperPrior::gamma(2.5, 0.5).to_string()) == HyperPrior::gamma(2.5, 0.5));
  CHECK_THROWS_AS(HyperPrior::parse("cauchy(0,1)"), ConfigError);
  CHECK_THROWS_AS(HyperPrior::parse("gamma(-1,1)"), ConfigError);
  CHECK(HyperPrior::gamma(1.0, 1.0).log_density(2.0) == doctest::Approx(-2.0));
  CHECK(HyperPrior::uniform(0.0, 1.0).log_density(0.5) == doctest::Approx(0.0));
  CHECK(std::isinf(HyperPrior::uniform(0.0, 1.0).log_density(1.5)));
  CHECK(HyperPrior::log_normal(0.0, 1.0).log_density(1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

}
