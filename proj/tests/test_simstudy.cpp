#include <doctest.h>

#include <set>

#include "mfmrasch/data.hpp"
#include "mfmrasch/error.hpp"
#include "mfmrasch/model.hpp"
#include "mfmrasch/simstudy.hpp"

using namespace mfmrasch;

namespace {

DesignSpec tiny_spec(int replicates) {
  DesignSpec spec = DesignSpec::desk(Design::d1);
  spec.n_subjects = 10;
  spec.n_items = 10;
  spec.n_replicates = replicates;
  spec.chain.n_burnin = 200;
  spec.chain.n_keep = 100;
  spec.chain.thin = 1;
  return spec;
}

}  // namespace

TEST_SUITE("simstudy") {

TEST_CASE("design parsing and defaults") {
  CHECK(parse_design("d2") == Design::d2);
  CHECK(to_string(Design::d1) == "d1");
  CHECK_THROWS_AS(parse_design("d3"), ConfigError);
  const auto d1 = DesignSpec::desk(Design::d1);
  CHECK(d1.n_subjects == 100);
  CHECK(d1.n_items == 30);
  CHECK(d1.n_replicates == 20);
  CHECK(d1.chain.n_burnin == 4000);
  CHECK(d1.chain.n_keep == 2000);
  CHECK(d1.chain.thin == 2);
  CHECK(d1.noise_sd == 0.0);
  CHECK(DesignSpec::desk(Design::d2).noise_sd == 0.5);
  const auto full = DesignSpec::full_scale(Design::d1, 100);
  CHECK(full.n_subjects == 200);
  CHECK(full.n_items == 100);
  CHECK(full.n_replicates == 100);
  CHECK(full.chain.n_burnin == 20000);
  CHECK(full.chain.n_keep == 10000);
}

TEST_CASE("degenerate value set") {
  DesignSpec spec = DesignSpec::desk(Design::d1);
  spec.value_set = {0.0};
  const auto sim = generate_replicate(spec, 0);
  CHECK(sim.truth.theta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sim.truth.b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sim.truth.z.maxCoeff() == 0);
  CHECK(sim.truth.g.maxCoeff() == 0);
  const Eigen::MatrixXd p = probability_matrix({sim.truth.theta, sim.truth.b});
  CHECK((p.array() == 0.5).all());

  spec.n_subjects = 500;
  spec.n_items = 200;
  const auto big = generate_replicate(spec, 0);
  CHECK(std::abs(summarize(big.data).overall_proportion - 0.5) <= 0.01);
}

TEST_CASE("design 1 truth") {
  const auto sim = generate_replicate(DesignSpec::full_scale(Design::d1), 0);
  std::set<double> distinct(sim.truth.theta.begin(), sim.truth.theta.end());
  CHECK(distinct == std::set<double>{-2.0, 0.0, 2.0});
  CHECK(sim.data.n_subjects() == 200);
  CHECK(sim.data.n_items() == 60);
}

TEST_CASE("design 2 adds noise to values, not labels") {
  const auto spec = DesignSpec::desk(Design::d2);
  const auto sim = generate_replicate(spec, 0);
  int off_grid = 0;
  for (Eigen::Index i = 0; i < sim.truth.theta.size(); ++i) {
    const double clean = spec.value_set[static_cast<std::size_t>(sim.truth.z(i))];
    off_grid += sim.truth.theta(i) != clean;
    CHECK(std::abs(sim.truth.theta(i) - clean) < 5.0 * spec.noise_sd);
  }
  CHECK(off_grid == sim.truth.theta.size());
}

TEST_CASE("replicates share the truth and redraw responses") {
  const auto spec = DesignSpec::desk(Design::d1);
  const auto a = generate_replicate(spec, 0);
  const auto b = generate_replicate(spec, 1);
  CHECK(a.truth.theta == b.truth.theta);
  CHECK(a.truth.g == b.truth.g);
  CHECK(a.data.responses != b.data.responses);
  CHECK(generate_replicate(spec, 1).data.responses == b.data.responses);
}

TEST_CASE("stand-in shape") {
  const auto sim = generate_standin(StandinSpec{});
  CHECK(sim.data.n_subjects() == 78);
  CHECK(sim.data.n_items() == 50);
  CHECK((sim.truth.z.array() == 0).count() == 22);
  CHECK((sim.truth.g.array() == 2).count() == 16);
}

TEST_CASE("one-replicate study") {
  const auto spec = tiny_spec(1);
  const auto report = run_study(spec, {Variant::mfm, Variant::plain});
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.summaries.size() == 2);
  const auto& row = report.rows[0];
  const auto& s = report.summaries[0];
  REQUIRE(row.ok);
  CHECK(s.n_ok == 1);
  CHECK(s.mab_theta == row.mab_theta);
  CHECK(s.mmse_b == row.mmse_b);
  CHECK(s.mpd == row.p_d);
  CHECK(s.mauc == row.auc);
  CHECK(s.k_frequency_b.at(row.k_b) == 1);
  CHECK_FALSE(report.rows[1].ri_theta.has_value());
}

TEST_CASE("study results do not depend on the worker count") {
  const auto spec = tiny_spec(3);
  const auto one = run_study(spec, {Variant::mfm}, 1);
  const auto three = run_study(spec, {Variant::mfm}, 3);
  REQUIRE(one.rows.size() == three.rows.size());
  for (std::size_t r = 0; r < one.rows.size(); ++r) {
    CHECK(one.rows[r].replicate == three.rows[r].replicate);
    CHECK(one.rows[r].theta_hat == three.rows[r].theta_hat);
    CHECK(one.rows[r].b_hat == three.rows[r].b_hat);
    CHECK(one.rows[r].p_d == three.rows[r].p_d);
  }
  CHECK(one.summaries[0].msd_theta == three.summaries[0].msd_theta);
}

TEST_CASE("spec validation") {
  auto spec = tiny_spec(1);
  spec.n_replicates = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = tiny_spec(1);
  spec.value_set.clear();
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

}
