#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "mfmrasch_cli_tests";

int mfmrasch(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + MFMRASCH_CLI_PATH + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

fs::path dir(const std::string& name) { return kRoot / name; }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kShort = " --burnin 400 --keep 200 --thin 1 --seed 3";

void write_homogeneous(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "subject";
  for (int j = 1; j <= 15; ++j) out << ",i" << j;
  out << '\n';
  unsigned s = 12345;
  for (int i = 1; i <= 30; ++i) {
    out << 's' << i;
    for (int j = 1; j <= 15; ++j) {
      s = s * 1103515245u + 12345u;
      out << ',' << ((s >> 16) & 1u);
    }
    out << '\n';
  }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate") {
  fs::remove_all(kRoot);
  REQUIRE(mfmrasch("simulate --design d1 --n 100 --j 30 --seed 7 --out " + q(dir("sim_a"))) == 0);
  REQUIRE(mfmrasch("simulate --design d1 --n 100 --j 30 --seed 7 --out " + q(dir("sim_b"))) == 0);
  CHECK(fs::exists(dir("sim_a") / "data.csv"));
  CHECK(fs::exists(dir("sim_a") / "truth.json"));
  for (const char* f : {"data.csv", "truth.json", "manifest.json"}) {
    CHECK(slurp(dir("sim_a") / f) == slurp(dir("sim_b") / f));
  }
  const json truth = load(dir("sim_a") / "truth.json");
  CHECK(truth.at("theta").size() == 100);
  CHECK(truth.at("b").size() == 30);

  REQUIRE(mfmrasch("simulate --design d2 --noise-sd 0.5 --out " + q(dir("sim_d2"))) == 0);
  const json t2 = load(dir("sim_d2") / "truth.json");
  const std::vector<double> grid{-2.0, 0.0, 2.0};
  bool noisy = true, clean_labels = true;
  for (std::size_t i = 0; i < t2.at("theta").size(); ++i) {
    const int z = t2.at("z")[i].get<int>();
    clean_labels = clean_labels && z >= 1 && z <= 3;
    noisy = noisy && t2.at("theta")[i].get<double>() != grid[static_cast<std::size_t>(z - 1)];
  }
  CHECK(noisy);
  CHECK(clean_labels);

  CHECK(mfmrasch("simulate --n 10") == 1);
  CHECK(mfmrasch("simulate --design d9") == 1);
  CHECK(mfmrasch("") == 1);
  CHECK(mfmrasch("--help") == 0);
}

TEST_CASE("output directory from the environment") {
  const auto target = dir("env_out");
  REQUIRE(mfmrasch("simulate --design standin", "MFMRASCH_OUTPUT_DIR=" + q(target)) == 0);
  CHECK(fs::exists(target / "data.csv"));
}

TEST_CASE("fit") {
  const auto data = dir("homog") / "data.csv";
  write_homogeneous(data);
  const auto out = dir("fit_homog");
  // Default chain length: on flat data the K posterior is close to the prior.
  REQUIRE(mfmrasch("fit --data " + q(data) + " --seed 3 --out " + q(out)) == 0);
  const json summary = load(out / "fit_summary.json");
  CHECK(summary.at("theta").at("modal_k").get<int>() == 1);
  CHECK(summary.at("b").at("modal_k").get<int>() == 1);
  for (const char* f : {"comparison.json", "manifest.json", "icc.csv", "theta_estimates.csv", "b_estimates.csv",
                        "draws/manifest.json", "draws/theta_draws.csv", "traces/trace_k_occ_b.csv"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }

  const auto again = dir("fit_homog_again");
  REQUIRE(mfmrasch("fit --data " + q(data) + " --seed 3 --out " + q(again)) == 0);
  for (const char* f : {"fit_summary.json", "comparison.json", "manifest.json", "draws/theta_draws.csv",
                        "draws/z_draws.csv", "draws/scalars.csv", "icc.csv"}) {
    CHECK_MESSAGE(slurp(out / f) == slurp(again / f), f);
  }
}

TEST_CASE("fit reports pD for both variants") {
  REQUIRE(mfmrasch("simulate --design d1 --out " + q(dir("sim_fit"))) == 0);
  const auto data = dir("sim_fit") / "data.csv";
  const std::string chain = " --burnin 1500 --keep 500 --thin 1 --seed 5";
  REQUIRE(mfmrasch("fit --data " + q(data) + chain + " --variant mfm --out " + q(dir("fit_mfm"))) == 0);
  REQUIRE(mfmrasch("fit --data " + q(data) + chain + " --variant plain --out " + q(dir("fit_plain"))) == 0);
  const double pd_mfm = load(dir("fit_mfm") / "comparison.json").at("p_d").get<double>();
  const double pd_plain = load(dir("fit_plain") / "comparison.json").at("p_d").get<double>();
  CHECK(pd_mfm < pd_plain);
  CHECK_FALSE(fs::exists(dir("fit_plain") / "icc.csv"));
}

TEST_CASE("fit errors and config precedence") {
  const auto bad = dir("bad") / "data.csv";
  fs::create_directories(bad.parent_path());
  std::ofstream(bad) << "subject,i1,i2\ns1,1,2\ns2,0,1\n";
  CHECK(mfmrasch("fit --data " + q(bad) + kShort + " --out " + q(dir("fit_bad"))) == 2);

  const auto data = dir("homog") / "data.csv";
  const auto cfg = dir("cfg") / "run.json";
  fs::create_directories(cfg.parent_path());
  std::ofstream(cfg) << R"({"chain": {"n_burnin": 100, "n_keep": 50, "thin": 1}})";
  REQUIRE(mfmrasch("fit --data " + q(data) + " --config " + q(cfg) + " --out " + q(dir("fit_cfg"))) == 0);
  CHECK(load(dir("fit_cfg") / "draws" / "manifest.json").at("n_draws").get<int>() == 50);
  REQUIRE(mfmrasch("fit --data " + q(data) + " --config " + q(cfg) + " --keep 30 --out " + q(dir("fit_cfg2"))) == 0);
  CHECK(load(dir("fit_cfg2") / "draws" / "manifest.json").at("n_draws").get<int>() == 30);

  std::ofstream(cfg) << R"({"chain": {"n_keep": 50, "burn": 3}})";
  CHECK(mfmrasch("fit --data " + q(data) + " --config " + q(cfg) + " --out " + q(dir("fit_cfg3"))) == 1);
  std::ofstream(cfg) << R"({"chains": {}})";
  CHECK(mfmrasch("fit --data " + q(data) + " --config " + q(cfg) + " --out " + q(dir("fit_cfg3"))) == 1);
  CHECK(mfmrasch("fit --data " + q(data) + kShort + " --trace nope --out " + q(dir("fit_cfg3"))) == 1);
}

TEST_CASE("priorselect") {
  const auto data = dir("homog") / "data.csv";
  REQUIRE(mfmrasch("priorselect --data " + q(data) + kShort + " --prior 'gamma(1,1)' --out " + q(dir("ps1"))) == 0);
  const json sel = load(dir("ps1") / "selection.json");
  CHECK(sel.at("rows").size() == 1);
  CHECK(sel.at("selection").get<std::string>() == "gamma(1,1)");
  CHECK_FALSE(sel.at("disagreement").get<bool>());
  const std::string table = slurp(dir("ps1") / "table_priors.csv");
  CHECK(table.rfind("prior,DIC,LPML", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
  CHECK(mfmrasch("priorselect --data " + q(data) + kShort + " --prior 'cauchy(0,1)' --out " + q(dir("ps2"))) == 1);
}

TEST_CASE("study and diagnose") {
  const std::string small = " --replicates 2 --n 12 --j 10 --burnin 200 --keep 100 --thin 1";
  REQUIRE(mfmrasch("study --design d1" + small + " --parallel 1 --out " + q(dir("st1"))) == 0);
  REQUIRE(mfmrasch("study --design d1" + small + " --parallel 2 --out " + q(dir("st2"))) == 0);
  for (const char* f : {"study_report.json", "table_performance.csv", "table_estimation.csv", "k_frequency.csv",
                        "replicates.csv", "manifest.json"}) {
    CHECK_MESSAGE(slurp(dir("st1") / f) == slurp(dir("st2") / f), f);
  }
  CHECK(fs::exists(dir("st1") / "timing.txt"));
  CHECK(mfmrasch("study --design d1 --variants mfm,hdp --out " + q(dir("st3"))) == 1);

  REQUIRE(mfmrasch("diagnose --draws " + q(dir("fit_homog") / "draws") + " --select 'theta[1]' --select k_occ_b" +
                   " --max-lag 5 --out " + q(dir("diag"))) == 0);
  CHECK(fs::exists(dir("diag") / "trace_theta_1.csv"));
  CHECK(fs::exists(dir("diag") / "acf_k_occ_b.csv"));
  CHECK(mfmrasch("diagnose --draws " + q(dir("nowhere"))) == 1);
}

}
