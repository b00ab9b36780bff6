#include <doctest.h>

#include <functional>

#include "mfmrasch/error.hpp"
#include "mfmrasch/metrics.hpp"

using namespace mfmrasch;

namespace {

Eigen::VectorXi vec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

// All set partitions of n units as restricted growth strings.
std::vector<Eigen::VectorXi> partitions(int n) {
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi cur(n);
  std::function<void(int, int)> rec = [&](int i, int max_label) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      cur(i) = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  rec(0, -1);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("pair confusion") {
  const auto same = pair_confusion(vec({1, 1, 2}), vec({1, 1, 2}));
  CHECK(same.tp == 1);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(same.tn == 2);
  const auto diff = pair_confusion(vec({1, 1, 2}), vec({1, 2, 2}));
  CHECK(diff.tp == 0);
  CHECK(diff.fp == 1);
  CHECK(diff.fn == 1);
  CHECK(diff.tn == 1);
  const auto singles = pair_confusion(vec({0, 1, 2, 3}), vec({3, 2, 1, 0}));
  CHECK(singles.tp == 0);
  CHECK(singles.tn == 6);
  CHECK_THROWS_AS(pair_confusion(vec({0, 1}), vec({0, 1, 2})), ConfigError);
}

TEST_CASE("rand index, precision and recall") {
  CHECK(rand_index(vec({1, 1, 2}), vec({1, 1, 2})) == 1.0);
  CHECK(precision(vec({1, 1, 2}), vec({1, 1, 2})).value() == 1.0);
  CHECK(recall(vec({1, 1, 2}), vec({1, 1, 2})).value() == 1.0);
  CHECK(rand_index(vec({1, 1, 2}), vec({1, 2, 2})) == doctest::Approx(1.0 / 3.0));
  CHECK(precision(vec({1, 1, 2}), vec({1, 2, 2})).value() == 0.0);
  CHECK(recall(vec({1, 1, 2}), vec({1, 2, 2})).value() == 0.0);
  // No estimated co-clustered pair: precision is not applicable.
  CHECK_FALSE(precision(vec({0, 0, 1}), vec({0, 1, 2})).has_value());
  CHECK_FALSE(recall(vec({0, 1, 2}), vec({0, 0, 1})).has_value());
}

TEST_CASE("pair enumeration on all small partitions") {
  for (int n = 2; n <= 5; ++n) {
    const auto all = partitions(n);
    for (const auto& t : all) {
      for (const auto& e : all) {
        long tp = 0, fp = 0, tn = 0, fn = 0;
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            const bool st = t(i) == t(j), se = e(i) == e(j);
            tp += st && se;
            fp += !st && se;
            fn += st && !se;
            tn += !st && !se;
          }
        }
        const auto c = pair_confusion(t, e);
        REQUIRE(c.tp == tp);
        REQUIRE(c.fp == fp);
        REQUIRE(c.fn == fn);
        REQUIRE(c.tn == tn);
        const double total = n * (n - 1) / 2.0;
        CHECK(rand_index(t, e) == (tp + tn) / total);
        CHECK(rand_index(t, e) == rand_index(e, t));
        const auto p = precision(t, e);
        const auto r = recall(t, e);
        CHECK(p.has_value() == (tp + fp > 0));
        CHECK(r.has_value() == (tp + fn > 0));
        if (p) CHECK(*p == double(tp) / double(tp + fp));
        if (r) CHECK(*r == double(tp) / double(tp + fn));
        const auto swapped = recall(e, t);
        CHECK(p.has_value() == swapped.has_value());
        if (p) CHECK(*p == *swapped);
      }
    }
  }
}

TEST_CASE("estimation error summaries") {
  const Eigen::Vector3d truth(0.5, -1.0, 2.0);
  Eigen::MatrixXd exact(4, 3);
  exact.rowwise() = truth.transpose();
  CHECK(mab(exact, truth) == 0.0);
  CHECK(mmse(exact, truth) == 0.0);
  CHECK(msd(exact) == 0.0);

  Eigen::MatrixXd two(2, 1);
  two << 1.0, 3.0;
  CHECK(mab(two, Eigen::VectorXd::Constant(1, 2.0)) == 1.0);
  CHECK(mmse(two, Eigen::VectorXd::Constant(1, 2.0)) == 1.0);
  CHECK(msd(two) == 1.0);

  Eigen::MatrixXd noisy = Eigen::MatrixXd::Random(5, 3);
  CHECK(mab(noisy, truth) >= 0.0);
  CHECK(mmse(noisy, truth) >= 0.0);
  CHECK_THROWS_AS(msd(Eigen::MatrixXd::Zero(1, 3)), ConfigError);
}

}
