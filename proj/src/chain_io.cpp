#include "mfmrasch/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename Matrix>
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header, const std::filesystem::path& path,
                      int label_offset = 0) {
  auto out = open_out(path);
  out << "draw";
  for (const auto& h : header) out << ',' << h;
  out << '\n';
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    out << t + 1;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if constexpr (std::is_integral_v<typename Matrix::Scalar>) {
        out << ',' << m(t, c) + label_offset;
      } else {
        out << ',' << format_double(m(t, c));
      }
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DataError("malformed number '" + s + "'");
  return v;
}

template <typename Matrix>
Matrix read_matrix_csv(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols, int label_offset = 0) {
  const auto data = read_csv_rows(path);
  if (static_cast<Eigen::Index>(data.size()) != rows) throw DataError(path.string() + ": unexpected row count");
  Matrix m(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const auto& r = data[static_cast<std::size_t>(t)];
    if (static_cast<Eigen::Index>(r.size()) != cols + 1) throw DataError(path.string() + ": unexpected column count");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = parse_double(r[static_cast<std::size_t>(c + 1)]);
      if constexpr (std::is_integral_v<typename Matrix::Scalar>) {
        m(t, c) = static_cast<int>(v) - label_offset;
      } else {
        m(t, c) = v;
      }
    }
  }
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

json to_json(const ChainConfig& cfg) {
  return json{{"n_burnin", cfg.n_burnin},
              {"n_keep", cfg.n_keep},
              {"thin", cfg.thin},
              {"seed", cfg.seed},
              {"variant", to_string(cfg.variant)},
              {"proposal_sd_init", cfg.proposal_sd_init},
              {"adapt", cfg.adapt},
              {"target_acceptance", cfg.target_acceptance},
              {"adapt_batch", cfg.adapt_batch},
              {"gamma", cfg.gamma},
              {"lambda_b_prior", cfg.lambda_b_prior.to_string()},
              {"lambda_theta_prior", cfg.lambda_theta_prior.to_string()},
              {"lambda_proposal_sd", cfg.lambda_proposal_sd},
              {"k_extra", cfg.k_extra},
              {"psi_b", cfg.psi_b},
              {"psi_theta_prior", cfg.psi_theta_prior.to_string()},
              {"plain_psi_b", cfg.plain_psi_b},
              {"plain_psi_theta_prior", cfg.plain_psi_theta_prior.to_string()},
              {"dp_alpha", cfg.dp_alpha},
              {"dp_truncation", cfg.dp_truncation},
              {"center", cfg.center},
              {"use_likelihood", cfg.use_likelihood}};
}

ChainConfig chain_config_from_json(const json& obj, ChainConfig cfg) {
  if (!obj.is_object()) throw ConfigError("chain configuration must be a JSON object");
  try {
    for (const auto& [key, value] : obj.items()) {
      if (key == "n_burnin") cfg.n_burnin = value.get<int>();
      else if (key == "n_keep") cfg.n_keep = value.get<int>();
      else if (key == "thin") cfg.thin = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "variant") cfg.variant = parse_variant(value.get<std::string>());
      else if (key == "proposal_sd_init") cfg.proposal_sd_init = value.get<double>();
      else if (key == "adapt") cfg.adapt = value.get<bool>();
      else if (key == "target_acceptance") cfg.target_acceptance = value.get<double>();
      else if (key == "adapt_batch") cfg.adapt_batch = value.get<int>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "lambda_b_prior") cfg.lambda_b_prior = HyperPrior::parse(value.get<std::string>());
      else if (key == "lambda_theta_prior") cfg.lambda_theta_prior = HyperPrior::parse(value.get<std::string>());
      else if (key == "lambda_proposal_sd") cfg.lambda_proposal_sd = value.get<double>();
      else if (key == "k_extra") cfg.k_extra = value.get<int>();
      else if (key == "psi_b") cfg.psi_b = value.get<double>();
      else if (key == "psi_theta_prior") cfg.psi_theta_prior = HyperPrior::parse(value.get<std::string>());
      else if (key == "plain_psi_b") cfg.plain_psi_b = value.get<double>();
      else if (key == "plain_psi_theta_prior") cfg.plain_psi_theta_prior = HyperPrior::parse(value.get<std::string>());
      else if (key == "dp_alpha") cfg.dp_alpha = value.get<double>();
      else if (key == "dp_truncation") cfg.dp_truncation = value.get<int>();
      else if (key == "center") cfg.center = value.get<bool>();
      else if (key == "use_likelihood") cfg.use_likelihood = value.get<bool>();
      else throw ConfigError("unknown chain configuration key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid chain configuration value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_chain_output(const ChainOutput& output, const ResponseMatrix& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest{{"format", "mfmrasch-draws"},
                {"version", kVersion},
                {"config", to_json(output.config)},
                {"seed", output.config.seed},
                {"n_subjects", output.n_subjects},
                {"n_items", output.n_items},
                {"n_draws", output.n_draws()},
                {"subject_ids", data.subject_ids},
                {"item_ids", data.item_ids},
                {"acceptance",
                 {{"theta", output.acceptance_theta},
                  {"b", output.acceptance_b},
                  {"lambda_theta", output.acceptance_lambda_theta},
                  {"lambda_b", output.acceptance_lambda_b}}},
                {"files",
                 {"theta_draws.csv", "b_draws.csv", "z_draws.csv", "g_draws.csv", "subject_loglik.csv",
                  "scalars.csv"}}};
  write_json_file(manifest, dir / "manifest.json");
  write_matrix_csv(output.theta_draws, data.subject_ids, dir / "theta_draws.csv");
  write_matrix_csv(output.b_draws, data.item_ids, dir / "b_draws.csv");
  write_matrix_csv(output.z_draws, data.subject_ids, dir / "z_draws.csv", 1);
  write_matrix_csv(output.g_draws, data.item_ids, dir / "g_draws.csv", 1);
  write_matrix_csv(output.per_subject_loglik_draws, data.subject_ids, dir / "subject_loglik.csv");

  auto out = open_out(dir / "scalars.csv");
  out << "draw,k_theta,k_b,k_occ_theta,k_occ_b,lambda_theta,lambda_b,psi_theta,loglik\n";
  for (Eigen::Index t = 0; t < output.n_draws(); ++t) {
    out << t + 1 << ',' << output.k_theta_draws(t) << ',' << output.k_b_draws(t) << ','
        << output.k_occ_theta_draws(t) << ',' << output.k_occ_b_draws(t) << ','
        << format_double(output.lambda_theta_draws(t)) << ',' << format_double(output.lambda_b_draws(t)) << ','
        << format_double(output.psi_theta_draws(t)) << ',' << format_double(output.loglik_draws(t)) << '\n';
  }
  auto timing = open_out(dir / "timing.txt");
  timing << "wall_time_seconds " << format_double(output.wall_time_seconds) << '\n';
}

ChainOutput read_chain_output(const std::filesystem::path& dir) {
  const json manifest = read_json_file(dir / "manifest.json");
  ChainOutput out;
  try {
    if (manifest.at("format").get<std::string>() != "mfmrasch-draws") throw DataError("not a draws directory");
    out.config = chain_config_from_json(manifest.at("config"));
    out.n_subjects = manifest.at("n_subjects").get<Eigen::Index>();
    out.n_items = manifest.at("n_items").get<Eigen::Index>();
    const auto& acc = manifest.at("acceptance");
    out.acceptance_theta = acc.at("theta").get<double>();
    out.acceptance_b = acc.at("b").get<double>();
    out.acceptance_lambda_theta = acc.at("lambda_theta").get<double>();
    out.acceptance_lambda_b = acc.at("lambda_b").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed draws manifest: ") + e.what());
  }
  const Eigen::Index m = manifest.at("n_draws").get<Eigen::Index>();
  out.theta_draws = read_matrix_csv<Eigen::MatrixXd>(dir / "theta_draws.csv", m, out.n_subjects);
  out.b_draws = read_matrix_csv<Eigen::MatrixXd>(dir / "b_draws.csv", m, out.n_items);
  out.z_draws = read_matrix_csv<Eigen::MatrixXi>(dir / "z_draws.csv", m, out.n_subjects, 1);
  out.g_draws = read_matrix_csv<Eigen::MatrixXi>(dir / "g_draws.csv", m, out.n_items, 1);
  out.per_subject_loglik_draws = read_matrix_csv<Eigen::MatrixXd>(dir / "subject_loglik.csv", m, out.n_subjects);
  const Eigen::MatrixXd scalars = read_matrix_csv<Eigen::MatrixXd>(dir / "scalars.csv", m, 8);
  out.k_theta_draws = scalars.col(0).cast<int>();
  out.k_b_draws = scalars.col(1).cast<int>();
  out.k_occ_theta_draws = scalars.col(2).cast<int>();
  out.k_occ_b_draws = scalars.col(3).cast<int>();
  out.lambda_theta_draws = scalars.col(4);
  out.lambda_b_draws = scalars.col(5);
  out.psi_theta_draws = scalars.col(6);
  out.loglik_draws = scalars.col(7);
  return out;
}

namespace {

json block_json(const BlockSummary& block, const std::vector<std::string>& ids) {
  json clusters = json::array();
  for (std::size_t c = 0; c < block.clusters.size(); ++c) {
    const auto& e = block.clusters[c];
    clusters.push_back({{"cluster", c + 1},
                        {"count", e.count},
                        {"estimate", e.mean},
                        {"hpd_lower", e.hpd_lower},
                        {"hpd_upper", e.hpd_upper},
                        {"correct_proportion", block.cluster_correct_proportion(static_cast<Eigen::Index>(c))}});
  }
  json partition = json::object();
  json means = json::object();
  for (Eigen::Index u = 0; u < block.partition.size(); ++u) {
    partition[ids[static_cast<std::size_t>(u)]] = block.partition(u) + 1;
    means[ids[static_cast<std::size_t>(u)]] = block.unit_means(u);
  }
  return {{"modal_k", block.modal_k}, {"clusters", clusters}, {"partition", partition}, {"posterior_means", means}};
}

}  // namespace

json to_json(const FitSummary& summary, const ResponseMatrix& data, double hpd_level) {
  return {{"hpd_level", hpd_level},
          {"theta", block_json(summary.theta, data.subject_ids)},
          {"b", block_json(summary.b, data.item_ids)}};
}

json to_json(const ComparisonReport& r) {
  return {{"dic", r.dic}, {"p_d", r.p_d}, {"lpml", r.lpml}, {"auc", r.auc},
          {"dev_at_mean", r.dev_at_mean}, {"mean_dev", r.mean_dev}};
}

json to_json(const Truth& truth) {
  auto to_vec = [](const auto& v) {
    std::vector<typename std::decay_t<decltype(v)>::Scalar> out(v.begin(), v.end());
    return out;
  };
  std::vector<int> z = to_vec(truth.z);
  std::vector<int> g = to_vec(truth.g);
  for (auto& l : z) ++l;
  for (auto& l : g) ++l;
  return {{"theta", to_vec(truth.theta)}, {"b", to_vec(truth.b)}, {"z", z}, {"g", g}};
}

json to_json(const DesignSpec& spec) {
  return {{"design", to_string(spec.design)}, {"n_subjects", spec.n_subjects}, {"n_items", spec.n_items},
          {"value_set", spec.value_set},      {"noise_sd", spec.noise_sd},     {"n_replicates", spec.n_replicates},
          {"base_seed", spec.base_seed},      {"fixed_truth", spec.fixed_truth}, {"chain", to_json(spec.chain)}};
}

namespace {

json mean_count_json(const MeanWithCount& m) {
  return {{"mean", m.n > 0 ? json(m.mean) : json(nullptr)}, {"n", m.n}, {"n_not_applicable", m.n_missing}};
}

json k_freq_json(const std::map<int, int>& freq) {
  json out = json::object();
  for (const auto& [k, c] : freq) out[std::to_string(k)] = c;
  return out;
}

}  // namespace

json to_json(const StudyReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"replicate", r.replicate + 1},
                    {"variant", to_string(r.variant)},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"mab_theta", r.mab_theta},
                    {"mab_b", r.mab_b},
                    {"mmse_theta", r.mmse_theta},
                    {"mmse_b", r.mmse_b},
                    {"ri_theta", optional_json(r.ri_theta)},
                    {"ri_b", optional_json(r.ri_b)},
                    {"precision_theta", optional_json(r.precision_theta)},
                    {"precision_b", optional_json(r.precision_b)},
                    {"recall_theta", optional_json(r.recall_theta)},
                    {"recall_b", optional_json(r.recall_b)},
                    {"k_theta", r.k_theta},
                    {"k_b", r.k_b},
                    {"p_d", r.p_d},
                    {"dic", r.dic},
                    {"lpml", r.lpml},
                    {"auc", r.auc}});
  }
  json summaries = json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"variant", to_string(s.variant)},
                         {"n_ok", s.n_ok},
                         {"n_failed", s.n_failed},
                         {"mab", {{"theta", s.mab_theta}, {"b", s.mab_b}}},
                         {"msd", {{"theta", s.msd_theta}, {"b", s.msd_b}}},
                         {"mmse", {{"theta", s.mmse_theta}, {"b", s.mmse_b}}},
                         {"mri", {{"theta", mean_count_json(s.mri_theta)}, {"b", mean_count_json(s.mri_b)}}},
                         {"mp", {{"theta", mean_count_json(s.mp_theta)}, {"b", mean_count_json(s.mp_b)}}},
                         {"mr", {{"theta", mean_count_json(s.mr_theta)}, {"b", mean_count_json(s.mr_b)}}},
                         {"mpd", s.mpd},
                         {"mauc", s.mauc},
                         {"k_frequency", {{"theta", k_freq_json(s.k_frequency_theta)}, {"b", k_freq_json(s.k_frequency_b)}}}});
  }
  return {{"version", kVersion}, {"spec", to_json(report.spec)}, {"summaries", summaries}, {"replicates", rows}};
}

void write_trace_csv(const TraceSeries& trace, const std::filesystem::path& dir) {
  std::string stem = trace.selector;
  for (auto& c : stem) {
    if (c == '[' || c == ']') c = '_';
  }
  if (!stem.empty() && stem.back() == '_') stem.pop_back();
  {
    auto out = open_out(dir / ("trace_" + stem + ".csv"));
    out << "draw," << trace.selector << '\n';
    for (Eigen::Index t = 0; t < trace.values.size(); ++t) out << t + 1 << ',' << format_double(trace.values(t)) << '\n';
  }
  auto out = open_out(dir / ("acf_" + stem + ".csv"));
  out << "lag,acf\n";
  if (trace.zero_variance) {
    out << "NA,zero_variance\n";
    return;
  }
  for (Eigen::Index k = 0; k < trace.acf.size(); ++k) out << k + 1 << ',' << format_double(trace.acf(k)) << '\n';
}

void write_icc_csv(const Eigen::VectorXd& b_cluster_values, const Eigen::VectorXd& theta_grid,
                   const std::filesystem::path& path) {
  const Eigen::MatrixXd curves = icc_curve(b_cluster_values, theta_grid);
  auto out = open_out(path);
  out << "theta";
  for (Eigen::Index c = 0; c < curves.cols(); ++c) out << ",cluster_" << c + 1;
  out << '\n';
  for (Eigen::Index g = 0; g < curves.rows(); ++g) {
    out << format_double(theta_grid(g));
    for (Eigen::Index c = 0; c < curves.cols(); ++c) out << ',' << format_double(curves(g, c));
    out << '\n';
  }
}

void write_unit_estimates_csv(const BlockSummary& block, const std::vector<std::string>& ids,
                              const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "id,cluster,posterior_mean,cluster_estimate\n";
  for (Eigen::Index u = 0; u < block.partition.size(); ++u) {
    const auto c = static_cast<std::size_t>(block.partition(u));
    out << ids[static_cast<std::size_t>(u)] << ',' << c + 1 << ',' << format_double(block.unit_means(u)) << ','
        << format_double(block.clusters[c].mean) << '\n';
  }
}

void write_study_tables(const StudyReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string design = to_string(report.spec.design);
  auto na = [](const MeanWithCount& m) { return m.n > 0 ? format_double(m.mean) : std::string("NA"); };
  {
    auto out = open_out(dir / "table_performance.csv");
    out << "design,model,MpD,MAUC,n_ok,n_failed\n";
    for (const auto& s : report.summaries) {
      out << design << ',' << to_string(s.variant) << ',' << format_double(s.mpd) << ',' << format_double(s.mauc)
          << ',' << s.n_ok << ',' << s.n_failed << '\n';
    }
  }
  {
    auto out = open_out(dir / "table_estimation.csv");
    out << "design,model,parameter,MAB,MSD,MMSE,MRI,MP,MR\n";
    for (const auto& s : report.summaries) {
      const std::string v = to_string(s.variant);
      out << design << ',' << v << ",theta," << format_double(s.mab_theta) << ',' << format_double(s.msd_theta) << ','
          << format_double(s.mmse_theta) << ',' << na(s.mri_theta) << ',' << na(s.mp_theta) << ','
          << na(s.mr_theta) << '\n';
      out << design << ',' << v << ",b," << format_double(s.mab_b) << ',' << format_double(s.msd_b) << ','
          << format_double(s.mmse_b) << ',' << na(s.mri_b) << ',' << na(s.mp_b) << ',' << na(s.mr_b) << '\n';
    }
  }
  {
    auto out = open_out(dir / "k_frequency.csv");
    out << "design,model,parameter,k,count\n";
    for (const auto& s : report.summaries) {
      for (const auto& [k, c] : s.k_frequency_theta) out << design << ',' << to_string(s.variant) << ",theta," << k << ',' << c << '\n';
      for (const auto& [k, c] : s.k_frequency_b) out << design << ',' << to_string(s.variant) << ",b," << k << ',' << c << '\n';
    }
  }
  {
    auto out = open_out(dir / "replicates.csv");
    out << "replicate,model,ok,k_theta,k_b,mab_theta,mab_b,mmse_theta,mmse_b,ri_theta,ri_b,precision_theta,"
           "precision_b,recall_theta,recall_b,p_d,dic,lpml,auc\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    for (const auto& r : report.rows) {
      out << r.replicate + 1 << ',' << to_string(r.variant) << ',' << (r.ok ? 1 : 0) << ',' << r.k_theta << ','
          << r.k_b << ',' << format_double(r.mab_theta) << ',' << format_double(r.mab_b) << ','
          << format_double(r.mmse_theta) << ',' << format_double(r.mmse_b) << ',' << opt(r.ri_theta) << ','
          << opt(r.ri_b) << ',' << opt(r.precision_theta) << ',' << opt(r.precision_b) << ','
          << opt(r.recall_theta) << ',' << opt(r.recall_b) << ',' << format_double(r.p_d) << ','
          << format_double(r.dic) << ',' << format_double(r.lpml) << ',' << format_double(r.auc) << '\n';
    }
  }
  auto timing = open_out(dir / "timing.txt");
  for (const auto& s : report.summaries) timing << to_string(s.variant) << " MTime " << format_double(s.mtime) << '\n';
  for (const auto& r : report.rows) {
    timing << "replicate " << r.replicate + 1 << ' ' << to_string(r.variant) << ' ' << format_double(r.time_seconds) << '\n';
  }
}

}  // namespace mfmrasch
