#ifndef MFMRASCH_DIAGNOSTICS_HPP
#define MFMRASCH_DIAGNOSTICS_HPP

#include <string>

#include <Eigen/Core>

#include "mfmrasch/data.hpp"
#include "mfmrasch/model.hpp"
#include "mfmrasch/sampler.hpp"

namespace mfmrasch {

// -2 * log-likelihood.
double deviance(const ResponseMatrix& data, const RaschParams& params);

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;
  double dev_at_mean = 0.0;
  double mean_dev = 0.0;
};

// Posterior mean is taken over the expanded per-unit theta and b vectors,
// so models with different clusterings share one parameterisation.
DicResult dic(const ChainOutput& output, const ResponseMatrix& data);

// Harmonic-mean CPO estimate for subject i, computed in log space.
double log_cpo(const ChainOutput& output, Eigen::Index i);
double cpo(const ChainOutput& output, Eigen::Index i);
double lpml(const ChainOutput& output);

// Mann-Whitney AUC of scores against binary labels; ties count one half.
double auc(const Eigen::Ref<const Eigen::VectorXi>& labels, const Eigen::Ref<const Eigen::VectorXd>& scores);
// In-sample AUC over all N*J cells.
double auc(const ResponseMatrix& data, const Eigen::MatrixXd& p_hat);

// Posterior-mean fitted probabilities.
Eigen::MatrixXd posterior_mean_probabilities(const ChainOutput& output);

struct ComparisonReport {
  double dic = 0.0;
  double p_d = 0.0;
  double lpml = 0.0;
  double auc = 0.0;
  double dev_at_mean = 0.0;
  double mean_dev = 0.0;
};

ComparisonReport compare_fit(const ChainOutput& output, const ResponseMatrix& data);

// Sample autocorrelation at lags 1..max_lag. Empty when the series is constant.
Eigen::VectorXd autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, int max_lag);

struct TraceSeries {
  std::string selector;
  Eigen::VectorXd values;
  Eigen::VectorXd acf;  // lags 1..max_lag
  bool zero_variance = false;
};

// Selectors: k_theta, k_b, k_occ_theta, k_occ_b, lambda_theta, lambda_b,
// psi_theta, loglik, deviance, theta[i], b[j] (1-based unit index).
TraceSeries trace_export(const ChainOutput& output, const std::string& selector, int max_lag = 50);

}  // namespace mfmrasch

#endif  // MFMRASCH_DIAGNOSTICS_HPP
