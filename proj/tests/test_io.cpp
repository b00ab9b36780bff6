#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mfmrasch/error.hpp"
#include "mfmrasch/io.hpp"

using namespace mfmrasch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mfmrasch_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("shortest round-trip numbers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("chain config json") {
  ChainConfig cfg;
  cfg.n_keep = 123;
  cfg.variant = Variant::dp;
  cfg.lambda_b_prior = HyperPrior::gamma(2.0, 3.0);
  const ChainConfig back = chain_config_from_json(to_json(cfg));
  CHECK(back.n_keep == 123);
  CHECK(back.variant == Variant::dp);
  CHECK(back.lambda_b_prior == cfg.lambda_b_prior);
  CHECK(back.psi_theta_prior == cfg.psi_theta_prior);
  CHECK(to_json(back) == to_json(cfg));

  CHECK_THROWS_AS(chain_config_from_json(nlohmann::json{{"n_kept", 5}}), ConfigError);
  CHECK_THROWS_AS(chain_config_from_json(nlohmann::json{{"n_keep", "many"}}), ConfigError);
  CHECK_THROWS_AS(chain_config_from_json(nlohmann::json{{"thin", 0}}), ConfigError);
  const ChainConfig partial = chain_config_from_json(nlohmann::json{{"seed", 99}});
  CHECK(partial.seed == 99);
  CHECK(partial.n_burnin == ChainConfig{}.n_burnin);
}

TEST_CASE("draws directory round trip") {
  const auto sim = generate_replicate(DesignSpec::desk(Design::d1), 0);
  ChainConfig cfg;
  cfg.n_burnin = 50;
  cfg.n_keep = 20;
  cfg.thin = 1;
  const auto out = run_chain(sim.data, cfg);
  const auto dir = scratch("draws");
  write_chain_output(out, sim.data, dir);
  const auto back = read_chain_output(dir);
  CHECK(back.theta_draws == out.theta_draws);
  CHECK(back.b_draws == out.b_draws);
  CHECK(back.z_draws == out.z_draws);
  CHECK(back.g_draws == out.g_draws);
  CHECK(back.k_theta_draws == out.k_theta_draws);
  CHECK(back.k_occ_b_draws == out.k_occ_b_draws);
  CHECK(back.lambda_theta_draws == out.lambda_theta_draws);
  CHECK(back.psi_theta_draws == out.psi_theta_draws);
  CHECK(back.loglik_draws == out.loglik_draws);
  CHECK(back.per_subject_loglik_draws == out.per_subject_loglik_draws);
  CHECK(back.acceptance_b == out.acceptance_b);
  CHECK(to_json(back.config) == to_json(out.config));

  // Labels are 1-based on disk.
  std::ifstream z(dir / "z_draws.csv");
  std::string header, first;
  std::getline(z, header);
  std::getline(z, first);
  CHECK(header.rfind("draw,s1,s2", 0) == 0);
  CHECK(first.find(",0,") == std::string::npos);

  CHECK_THROWS_AS(read_chain_output(dir / "missing"), DataError);
}

TEST_CASE("study tables") {
  DesignSpec spec = DesignSpec::desk(Design::d1);
  spec.n_subjects = 10;
  spec.n_items = 10;
  spec.n_replicates = 1;
  spec.chain.n_burnin = 100;
  spec.chain.n_keep = 50;
  spec.chain.thin = 1;
  const auto report = run_study(spec, {Variant::mfm, Variant::plain});
  const auto dir = scratch("study");
  write_study_tables(report, dir);
  for (const char* f : {"table_performance.csv", "table_estimation.csv", "k_frequency.csv", "replicates.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  std::ifstream perf(dir / "table_performance.csv");
  std::string header;
  std::getline(perf, header);
  CHECK(header == "design,model,MpD,MAUC,n_ok,n_failed");
  std::ifstream est(dir / "table_estimation.csv");
  std::getline(est, header);
  CHECK(header == "design,model,parameter,MAB,MSD,MMSE,MRI,MP,MR");
  const auto doc = to_json(report);
  CHECK(doc.at("summaries").size() == 2);
  CHECK(doc.at("replicates").size() == 2);
  CHECK(doc.dump().find("time") == std::string::npos);
}

}
