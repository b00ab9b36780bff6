#include "mfmrasch/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "mfmrasch/error.hpp"
#include "mfmrasch/io.hpp"

namespace mfmrasch::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDefaultTraces{"k_occ_theta", "k_occ_b", "lambda_theta", "lambda_b",
                                              "psi_theta",   "loglik",  "deviance"};

// Chain flags shared by fit, priorselect and study.
struct ChainFlags {
  int n_burnin = 0, n_keep = 0, thin = 0;
  std::uint64_t seed = 0;
  std::string variant;
  std::string lambda_theta_prior, lambda_b_prior;
  double gamma = 1.0;
  bool center = false;
  std::string config_path;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App& app, bool with_variant, bool with_seed) {
    opts["burnin"] = app.add_option("--burnin", n_burnin, "Burn-in sweeps");
    opts["keep"] = app.add_option("--keep", n_keep, "Kept draws");
    opts["thin"] = app.add_option("--thin", thin, "Thinning interval");
    if (with_seed) opts["seed"] = app.add_option("--seed", seed, "Chain seed");
    if (with_variant) {
      opts["variant"] = app.add_option("--variant", variant, "mfm, dp or plain")
                            ->check(CLI::IsMember({"mfm", "dp", "plain"}));
    }
    opts["lambda_theta_prior"] = app.add_option("--lambda-theta-prior", lambda_theta_prior, "Hyperprior of lambda_theta");
    opts["lambda_b_prior"] = app.add_option("--lambda-b-prior", lambda_b_prior, "Hyperprior of lambda_b");
    opts["gamma"] = app.add_option("--gamma", gamma, "Dirichlet concentration");
    opts["center"] = app.add_flag("--center", center, "Center stored draws on the mean difficulty");
    opts["config"] = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  }

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  json config_file() const {
    if (!given("config")) return json::object();
    json doc = read_json_file(config_path);
    if (!doc.is_object()) throw ConfigError("run configuration must be a JSON object");
    return doc;
  }

  ChainConfig apply(ChainConfig cfg, const json& file) const {
    if (file.contains("chain")) cfg = chain_config_from_json(file.at("chain"), cfg);
    if (given("burnin")) cfg.n_burnin = n_burnin;
    if (given("keep")) cfg.n_keep = n_keep;
    if (given("thin")) cfg.thin = thin;
    if (given("seed")) cfg.seed = seed;
    if (given("variant")) cfg.variant = parse_variant(variant);
    if (given("lambda_theta_prior")) cfg.lambda_theta_prior = HyperPrior::parse(lambda_theta_prior);
    if (given("lambda_b_prior")) cfg.lambda_b_prior = HyperPrior::parse(lambda_b_prior);
    if (given("gamma")) cfg.gamma = gamma;
    if (given("center")) cfg.center = center;
    cfg.validate();
    return cfg;
  }
};

void check_keys(const json& file, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : file.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown run configuration key '" + key + "'");
  }
}

template <typename T>
T file_value(const json& file, const std::string& key, T fallback) {
  if (!file.contains(key)) return fallback;
  try {
    return file.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

fs::path output_dir(const CLI::Option* opt, const std::string& flag_value) {
  if (opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("MFMRASCH_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "mfmrasch-out";
}

json versions() {
  return {{"mfmrasch", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

void write_manifest(const fs::path& dir, const std::string& command, json body) {
  body["command"] = command;
  body["versions"] = versions();
  write_json_file(body, dir / "manifest.json");
}

Eigen::VectorXd icc_grid() { return Eigen::VectorXd::LinSpaced(81, -4.0, 4.0); }

Eigen::VectorXd cluster_means(const BlockSummary& block) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(block.clusters.size()));
  for (std::size_t c = 0; c < block.clusters.size(); ++c) out(static_cast<Eigen::Index>(c)) = block.clusters[c].mean;
  return out;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string design;
  int n = 0, j = 0, replicate = 1;
  std::uint64_t seed = 0;
  double noise_sd = 0.0;
  std::string out;
  CLI::Option *n_opt, *j_opt, *seed_opt, *noise_opt, *out_opt;
};

int cmd_simulate(const SimulateArgs& a) {
  const fs::path dir = output_dir(a.out_opt, a.out);
  SimulatedData sim;
  json spec_json;
  if (a.design == "standin") {
    if (a.n_opt->count() || a.j_opt->count()) throw ConfigError("--n and --j do not apply to the stand-in design");
    StandinSpec spec;
    if (a.seed_opt->count()) spec.seed = a.seed;
    if (a.noise_opt->count()) spec.noise_sd = a.noise_sd;
    sim = generate_standin(spec);
    spec_json = {{"design", "standin"},        {"theta_values", spec.theta_values}, {"theta_counts", spec.theta_counts},
                 {"b_values", spec.b_values},  {"b_counts", spec.b_counts},         {"noise_sd", spec.noise_sd},
                 {"seed", spec.seed}};
  } else {
    DesignSpec spec = DesignSpec::desk(parse_design(a.design));
    if (a.n_opt->count()) spec.n_subjects = a.n;
    if (a.j_opt->count()) spec.n_items = a.j;
    if (a.seed_opt->count()) spec.base_seed = a.seed;
    if (a.noise_opt->count()) spec.noise_sd = a.noise_sd;
    if (a.replicate < 1) throw ConfigError("--replicate must be >= 1");
    spec.n_replicates = std::max(spec.n_replicates, a.replicate);
    spec.validate();
    sim = generate_replicate(spec, a.replicate - 1);
    spec_json = to_json(spec);
    spec_json.erase("chain");
    spec_json.erase("n_replicates");
    spec_json["replicate"] = a.replicate;
  }
  fs::create_directories(dir);
  save_responses(sim.data, dir / "data.csv", DataFormat::csv);
  write_json_file(to_json(sim.truth), dir / "truth.json");
  write_manifest(dir, "simulate", {{"spec", spec_json}, {"files", {"data.csv", "truth.json"}}});
  std::cout << "wrote " << (dir / "data.csv").string() << " and " << (dir / "truth.json").string() << '\n';
  return 0;
}

// fit -----------------------------------------------------------------------

struct FitArgs {
  std::string data_path;
  double hpd_level = 0.68;
  int max_lag = 50;
  std::vector<std::string> traces;
  std::string out;
  ChainFlags chain;
  CLI::Option *hpd_opt, *lag_opt, *trace_opt, *out_opt;
};

int cmd_fit(const FitArgs& a) {
  const json file = a.chain.config_file();
  check_keys(file, {"chain", "hpd_level", "max_lag", "traces"});
  ChainConfig defaults;
  const ChainConfig cfg = a.chain.apply(defaults, file);
  const double level = a.hpd_opt->count() ? a.hpd_level : file_value(file, "hpd_level", 0.68);
  const int max_lag = a.lag_opt->count() ? a.max_lag : file_value(file, "max_lag", 50);
  const auto traces =
      a.trace_opt->count() ? a.traces : file_value<std::vector<std::string>>(file, "traces", kDefaultTraces);
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("--hpd-level must be in (0, 1)");
  if (max_lag < 1) throw ConfigError("--max-lag must be >= 1");

  const ResponseMatrix data = load_responses(a.data_path);
  const fs::path dir = output_dir(a.out_opt, a.out);
  fs::create_directories(dir);

  const ChainOutput output = run_chain(data, cfg);
  // Validate selectors before writing anything that depends on them.
  std::vector<TraceSeries> series;
  for (const auto& s : traces) series.push_back(trace_export(output, s, max_lag));

  write_chain_output(output, data, dir / "draws");
  const FitSummary summary = summarize_fit(output, data, level);
  write_json_file(to_json(summary, data, level), dir / "fit_summary.json");
  const ComparisonReport report = compare_fit(output, data);
  write_json_file(to_json(report), dir / "comparison.json");
  const fs::path trace_dir = dir / "traces";
  fs::create_directories(trace_dir);
  for (const auto& t : series) write_trace_csv(t, trace_dir);
  write_unit_estimates_csv(summary.theta, data.subject_ids, dir / "theta_estimates.csv");
  write_unit_estimates_csv(summary.b, data.item_ids, dir / "b_estimates.csv");
  json files{"draws/manifest.json", "fit_summary.json", "comparison.json", "traces/", "theta_estimates.csv",
             "b_estimates.csv"};
  if (cfg.variant != Variant::plain) {
    write_icc_csv(cluster_means(summary.b), icc_grid(), dir / "icc.csv");
    files.push_back("icc.csv");
  }
  write_manifest(dir, "fit",
                 {{"data", {{"path", a.data_path}, {"n_subjects", data.n_subjects()}, {"n_items", data.n_items()}}},
                  {"config", to_json(cfg)},
                  {"seed", cfg.seed},
                  {"hpd_level", level},
                  {"traces", traces},
                  {"max_lag", max_lag},
                  {"files", files}});
  std::cout << to_string(cfg.variant) << ": K_theta=" << summary.theta.modal_k << " K_b=" << summary.b.modal_k
            << " DIC=" << format_double(report.dic) << " pD=" << format_double(report.p_d)
            << " LPML=" << format_double(report.lpml) << " AUC=" << format_double(report.auc) << '\n';
  return 0;
}

// priorselect ---------------------------------------------------------------

struct PriorSelectArgs {
  std::string data_path;
  std::vector<std::string> priors;
  std::string out;
  ChainFlags chain;
  CLI::Option *prior_opt, *out_opt;
};

int cmd_priorselect(const PriorSelectArgs& a) {
  const json file = a.chain.config_file();
  check_keys(file, {"chain", "priors"});
  ChainConfig base = a.chain.apply(ChainConfig{}, file);
  if (base.variant != Variant::mfm) throw ConfigError("priorselect fits the mfm variant only");
  const std::vector<std::string> names =
      a.prior_opt->count() ? a.priors
                           : file_value<std::vector<std::string>>(file, "priors", {"gamma(1,1)", "uniform(0,1)",
                                                                                    "log_normal(0,1)"});
  if (names.empty()) throw ConfigError("prior list is empty");
  std::vector<HyperPrior> priors;
  for (const auto& n : names) priors.push_back(HyperPrior::parse(n));

  const ResponseMatrix data = load_responses(a.data_path);
  const fs::path dir = output_dir(a.out_opt, a.out);
  fs::create_directories(dir);

  json rows = json::array();
  std::size_t best_dic = 0, best_lpml = 0;
  std::vector<ComparisonReport> reports;
  for (std::size_t p = 0; p < priors.size(); ++p) {
    ChainConfig cfg = base;
    cfg.lambda_theta_prior = priors[p];
    cfg.lambda_b_prior = priors[p];
    const ChainOutput output = run_chain(data, cfg);
    const FitSummary summary = summarize_fit(output, data);
    reports.push_back(compare_fit(output, data));
    const auto& r = reports.back();
    if (r.dic < reports[best_dic].dic) best_dic = p;
    if (r.lpml > reports[best_lpml].lpml) best_lpml = p;
    rows.push_back({{"prior", priors[p].to_string()},
                    {"dic", r.dic},
                    {"lpml", r.lpml},
                    {"p_d", r.p_d},
                    {"k_theta", summary.theta.modal_k},
                    {"k_b", summary.b.modal_k}});
  }
  {
    std::ofstream out(dir / "table_priors.csv", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "table_priors.csv").string());
    out << "prior,DIC,LPML,pD,K_theta,K_b\n";
    for (std::size_t p = 0; p < priors.size(); ++p) {
      out << '"' << priors[p].to_string() << "\"," << format_double(reports[p].dic) << ','
          << format_double(reports[p].lpml) << ',' << format_double(reports[p].p_d) << ','
          << rows[p]["k_theta"].get<int>() << ',' << rows[p]["k_b"].get<int>() << '\n';
    }
  }
  const bool agree = best_dic == best_lpml;
  json selection{{"rows", rows},
                 {"dic_choice", priors[best_dic].to_string()},
                 {"lpml_choice", priors[best_lpml].to_string()},
                 {"disagreement", !agree},
                 {"selection", agree ? json(priors[best_dic].to_string()) : json(nullptr)}};
  write_json_file(selection, dir / "selection.json");
  write_manifest(dir, "priorselect",
                 {{"data", {{"path", a.data_path}, {"n_subjects", data.n_subjects()}, {"n_items", data.n_items()}}},
                  {"config", to_json(base)},
                  {"seed", base.seed},
                  {"priors", names},
                  {"files", {"table_priors.csv", "selection.json"}}});
  if (agree) {
    std::cout << "selected " << priors[best_dic].to_string() << '\n';
  } else {
    std::cout << "DIC prefers " << priors[best_dic].to_string() << ", LPML prefers "
              << priors[best_lpml].to_string() << '\n';
  }
  return 0;
}

// study ---------------------------------------------------------------------

struct StudyArgs {
  std::string design;
  int replicates = 0, n = 0, j = 0, parallel = 1;
  std::uint64_t seed = 0;
  bool full_scale = false;
  std::vector<std::string> variants{"mfm", "plain"};
  std::string out;
  ChainFlags chain;
  CLI::Option *rep_opt, *n_opt, *j_opt, *seed_opt, *out_opt;
};

int cmd_study(const StudyArgs& a) {
  const json file = a.chain.config_file();
  check_keys(file, {"chain", "n_subjects", "n_items", "n_replicates", "base_seed", "noise_sd", "fixed_truth"});
  const Design d = parse_design(a.design);
  DesignSpec spec = a.full_scale ? DesignSpec::full_scale(d, a.j_opt->count() ? a.j : 60) : DesignSpec::desk(d);
  spec.n_subjects = file_value(file, "n_subjects", spec.n_subjects);
  spec.n_items = file_value(file, "n_items", spec.n_items);
  spec.n_replicates = file_value(file, "n_replicates", spec.n_replicates);
  spec.base_seed = file_value(file, "base_seed", spec.base_seed);
  spec.noise_sd = file_value(file, "noise_sd", spec.noise_sd);
  spec.fixed_truth = file_value(file, "fixed_truth", spec.fixed_truth);
  spec.chain = a.chain.apply(spec.chain, file);
  if (a.rep_opt->count()) spec.n_replicates = a.replicates;
  if (a.n_opt->count()) spec.n_subjects = a.n;
  if (a.j_opt->count()) spec.n_items = a.j;
  if (a.seed_opt->count()) spec.base_seed = a.seed;
  spec.validate();
  if (a.parallel < 1) throw ConfigError("--parallel must be >= 1");
  std::vector<Variant> variants;
  for (const auto& v : a.variants) variants.push_back(parse_variant(v));
  if (variants.empty()) throw ConfigError("no variants selected");

  const fs::path dir = output_dir(a.out_opt, a.out);
  fs::create_directories(dir);
  const StudyReport report = run_study(spec, variants, a.parallel);
  write_json_file(to_json(report), dir / "study_report.json");
  write_study_tables(report, dir);
  write_manifest(dir, "study",
                 {{"spec", to_json(spec)},
                  {"variants", a.variants},
                  {"files",
                   {"study_report.json", "table_performance.csv", "table_estimation.csv", "k_frequency.csv",
                    "replicates.csv"}}});
  for (const auto& s : report.summaries) {
    std::cout << to_string(s.variant) << ": ok=" << s.n_ok << " failed=" << s.n_failed
              << " MAB=" << format_double(s.mab_theta) << "/" << format_double(s.mab_b)
              << " MpD=" << format_double(s.mpd) << " MAUC=" << format_double(s.mauc) << '\n';
  }
  return 0;
}

// diagnose ------------------------------------------------------------------

struct DiagnoseArgs {
  std::string draws;
  std::vector<std::string> select;
  int max_lag = 50;
  std::string data_path;
  std::string out;
  CLI::Option *select_opt, *data_opt, *out_opt;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  if (a.max_lag < 1) throw ConfigError("--max-lag must be >= 1");
  const ChainOutput output = read_chain_output(a.draws);
  const auto selectors = a.select_opt->count() ? a.select : kDefaultTraces;
  std::vector<TraceSeries> series;
  for (const auto& s : selectors) series.push_back(trace_export(output, s, a.max_lag));
  const fs::path dir = output_dir(a.out_opt, a.out);
  fs::create_directories(dir);
  for (const auto& t : series) write_trace_csv(t, dir);
  json files = json::array();
  for (const auto& t : series) files.push_back(t.selector);
  json body{{"draws", a.draws}, {"selectors", files}, {"max_lag", a.max_lag}};
  if (a.data_opt->count()) {
    const ResponseMatrix data = load_responses(a.data_path);
    write_json_file(to_json(compare_fit(output, data)), dir / "comparison.json");
    body["data"] = a.data_path;
  }
  write_manifest(dir, "diagnose", body);
  for (const auto& t : series) {
    std::cout << t.selector << ": mean=" << format_double(t.values.mean());
    if (t.zero_variance) {
      std::cout << " (zero variance)";
    } else {
      std::cout << " acf1=" << format_double(t.acf(0));
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Rasch model with mixture-of-finite-mixtures priors on abilities and difficulties", "mfmrasch"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a data set with known truth");
  sim_cmd->add_option("--design", sim.design, "d1, d2 or standin")
      ->required()
      ->check(CLI::IsMember({"d1", "d2", "standin"}));
  sim.n_opt = sim_cmd->add_option("--n", sim.n, "Number of subjects");
  sim.j_opt = sim_cmd->add_option("--j", sim.j, "Number of items");
  sim.seed_opt = sim_cmd->add_option("--seed", sim.seed, "Base seed");
  sim.noise_opt = sim_cmd->add_option("--noise-sd", sim.noise_sd, "Noise s.d. added to true values");
  sim_cmd->add_option("--replicate", sim.replicate, "Replicate index (1-based)");
  sim.out_opt = sim_cmd->add_option("--out", sim.out, "Output directory");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run one chain and summarize it");
  fit_cmd->add_option("--data", fit.data_path, "Response matrix (.csv or .json)")->required()->check(CLI::ExistingFile);
  fit.chain.add(*fit_cmd, true, true);
  fit.hpd_opt = fit_cmd->add_option("--hpd-level", fit.hpd_level, "HPD interval level");
  fit.lag_opt = fit_cmd->add_option("--max-lag", fit.max_lag, "Largest autocorrelation lag");
  fit.trace_opt = fit_cmd->add_option("--trace", fit.traces, "Trace selector (repeatable)");
  fit.out_opt = fit_cmd->add_option("--out", fit.out, "Output directory");

  PriorSelectArgs ps;
  auto* ps_cmd = app.add_subcommand("priorselect", "Compare hyperpriors for lambda by DIC and LPML");
  ps_cmd->add_option("--data", ps.data_path, "Response matrix (.csv or .json)")->required()->check(CLI::ExistingFile);
  ps.chain.add(*ps_cmd, false, true);
  ps.prior_opt = ps_cmd->add_option("--prior", ps.priors, "Hyperprior, e.g. gamma(1,1) (repeatable)");
  ps.out_opt = ps_cmd->add_option("--out", ps.out, "Output directory");

  StudyArgs st;
  auto* st_cmd = app.add_subcommand("study", "Replicate simulation study");
  st_cmd->add_option("--design", st.design, "d1 or d2")->required()->check(CLI::IsMember({"d1", "d2"}));
  st.rep_opt = st_cmd->add_option("--replicates", st.replicates, "Number of replicates");
  st.n_opt = st_cmd->add_option("--n", st.n, "Number of subjects");
  st.j_opt = st_cmd->add_option("--j", st.j, "Number of items");
  st.seed_opt = st_cmd->add_option("--seed", st.seed, "Base seed");
  st_cmd->add_option("--parallel", st.parallel, "Worker threads");
  st_cmd->add_flag("--full-scale", st.full_scale, "N=200, J=60 (or --j 100), 100 replicates, 20000/10000/2");
  st_cmd->add_option("--variants", st.variants, "Variants to fit")->delimiter(',');
  st.chain.add(*st_cmd, false, false);
  st.out_opt = st_cmd->add_option("--out", st.out, "Output directory");

  DiagnoseArgs dg;
  auto* dg_cmd = app.add_subcommand("diagnose", "Export traces and autocorrelations from a draws directory");
  dg_cmd->add_option("--draws", dg.draws, "Draws directory written by fit")->required()->check(CLI::ExistingDirectory);
  dg.select_opt = dg_cmd->add_option("--select", dg.select, "Trace selector (repeatable)");
  dg_cmd->add_option("--max-lag", dg.max_lag, "Largest autocorrelation lag");
  dg.data_opt = dg_cmd->add_option("--data", dg.data_path, "Response matrix for DIC/LPML/AUC")->check(CLI::ExistingFile);
  dg.out_opt = dg_cmd->add_option("--out", dg.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (ps_cmd->parsed()) return cmd_priorselect(ps);
    if (st_cmd->parsed()) return cmd_study(st);
    if (dg_cmd->parsed()) return cmd_diagnose(dg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace mfmrasch::cli
