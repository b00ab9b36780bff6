#include "mfmrasch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <vector>

#include "mfmrasch/error.hpp"
#include "mfmrasch/random.hpp"

namespace mfmrasch {

double deviance(const ResponseMatrix& data, const RaschParams& params) {
  return -2.0 * log_likelihood(data, params);
}

DicResult dic(const ChainOutput& output, const ResponseMatrix& data) {
  if (output.n_draws() < 2) throw ConfigError("DIC needs at least 2 kept draws");
  DicResult r;
  const RaschParams mean{output.theta_draws.colwise().mean().transpose(),
                         output.b_draws.colwise().mean().transpose()};
  r.dev_at_mean = deviance(data, mean);
  r.mean_dev = -2.0 * output.loglik_draws.mean();
  r.p_d = r.mean_dev - r.dev_at_mean;
  r.dic = r.dev_at_mean + 2.0 * r.p_d;
  return r;
}

double log_cpo(const ChainOutput& output, Eigen::Index i) {
  if (i < 0 || i >= output.per_subject_loglik_draws.cols()) {
    throw ConfigError("subject index " + std::to_string(i) + " out of range");
  }
  if (output.n_draws() == 0) throw ConfigError("CPO needs at least one draw");
  const Eigen::VectorXd neg = -output.per_subject_loglik_draws.col(i);
  return -(log_sum_exp(neg) - std::log(static_cast<double>(neg.size())));
}

double cpo(const ChainOutput& output, Eigen::Index i) { return std::exp(log_cpo(output, i)); }

double lpml(const ChainOutput& output) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < output.per_subject_loglik_draws.cols(); ++i) s += log_cpo(output, i);
  return s;
}

double auc(const Eigen::Ref<const Eigen::VectorXi>& labels, const Eigen::Ref<const Eigen::VectorXd>& scores) {
  if (labels.size() != scores.size()) throw ConfigError("labels and scores differ in length");
  const Eigen::Index n = labels.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start;
    while (end < n && scores(idx[static_cast<std::size_t>(end)]) == scores(idx[static_cast<std::size_t>(start)])) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (Eigen::Index r = start; r < end; ++r) {
      if (labels(idx[static_cast<std::size_t>(r)]) != 0) {
        rank_sum += mid_rank;
        n_pos += 1.0;
      }
    }
    start = end;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("AUC needs at least one positive and one negative cell");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double auc(const ResponseMatrix& data, const Eigen::MatrixXd& p_hat) {
  if (p_hat.rows() != data.n_subjects() || p_hat.cols() != data.n_items()) {
    throw ConfigError("fitted probabilities do not match the data dimensions");
  }
  const Eigen::VectorXi y = data.responses.reshaped();
  const Eigen::VectorXd p = p_hat.reshaped();
  return auc(y, p);
}

Eigen::MatrixXd posterior_mean_probabilities(const ChainOutput& output) {
  return probability_matrix(
      {output.theta_draws.colwise().mean().transpose(), output.b_draws.colwise().mean().transpose()});
}

ComparisonReport compare_fit(const ChainOutput& output, const ResponseMatrix& data) {
  const DicResult d = dic(output, data);
  ComparisonReport r;
  r.dic = d.dic;
  r.p_d = d.p_d;
  r.dev_at_mean = d.dev_at_mean;
  r.mean_dev = d.mean_dev;
  r.lpml = lpml(output);
  r.auc = auc(data, posterior_mean_probabilities(output));
  return r;
}

Eigen::VectorXd autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, int max_lag) {
  const Eigen::Index m = series.size();
  const Eigen::VectorXd centered = series.array() - series.mean();
  if (m < 2 || series.maxCoeff() == series.minCoeff()) return {};
  const double denom = centered.squaredNorm();
  const Eigen::Index lags = std::min<Eigen::Index>(max_lag, m - 1);
  Eigen::VectorXd acf(lags);
  for (Eigen::Index k = 1; k <= lags; ++k) {
    acf(k - 1) = centered.head(m - k).dot(centered.tail(m - k)) / denom;
  }
  return acf;
}

TraceSeries trace_export(const ChainOutput& output, const std::string& selector, int max_lag) {
  TraceSeries s;
  s.selector = selector;
  static const std::regex unit_pattern(R"((theta|b)\[(\d+)\])");
  std::smatch m;
  if (selector == "k_theta") {
    s.values = output.k_theta_draws.cast<double>();
  } else if (selector == "k_b") {
    s.values = output.k_b_draws.cast<double>();
  } else if (selector == "k_occ_theta") {
    s.values = output.k_occ_theta_draws.cast<double>();
  } else if (selector == "k_occ_b") {
    s.values = output.k_occ_b_draws.cast<double>();
  } else if (selector == "lambda_theta") {
    s.values = output.lambda_theta_draws;
  } else if (selector == "lambda_b") {
    s.values = output.lambda_b_draws;
  } else if (selector == "psi_theta") {
    s.values = output.psi_theta_draws;
  } else if (selector == "loglik") {
    s.values = output.loglik_draws;
  } else if (selector == "deviance") {
    s.values = -2.0 * output.loglik_draws;
  } else if (std::regex_match(selector, m, unit_pattern)) {
    const bool theta = m[1].str() == "theta";
    const long idx = std::stol(m[2].str());
    const Eigen::MatrixXd& draws = theta ? output.theta_draws : output.b_draws;
    if (idx < 1 || idx > draws.cols()) throw ConfigError("unit index out of range in selector '" + selector + "'");
    s.values = draws.col(idx - 1);
  } else {
    throw ConfigError("unknown trace selector '" + selector + "'");
  }
  s.acf = autocorrelation(s.values, max_lag);
  s.zero_variance = s.acf.size() == 0;
  return s;
}

}  // namespace mfmrasch
