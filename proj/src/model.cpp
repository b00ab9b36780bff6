#include "mfmrasch/model.hpp"

#include <string>

#include "mfmrasch/error.hpp"

namespace mfmrasch {

namespace {

void check_dims(const ResponseMatrix& data, const RaschParams& params) {
  if (params.theta.size() != data.n_subjects() || params.b.size() != data.n_items()) {
    throw ConfigError("parameter dimensions (" + std::to_string(params.theta.size()) + ", " +
                      std::to_string(params.b.size()) + ") do not match data (" +
                      std::to_string(data.n_subjects()) + ", " + std::to_string(data.n_items()) +
                      ")");
  }
}

double row_log_likelihood(const ResponseMatrix& data, Eigen::Index i, const RaschParams& params) {
  double ll = 0.0;
  for (Eigen::Index j = 0; j < data.n_items(); ++j) {
    ll += bernoulli_logit_log_prob(data.responses(i, j), params.theta(i) - params.b(j));
  }
  return ll;
}

}  // namespace

double log_likelihood(const ResponseMatrix& data, const RaschParams& params) {
  check_dims(data, params);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < data.n_subjects(); ++i) ll += row_log_likelihood(data, i, params);
  return ll;
}

SubjectLikelihood subject_likelihood(const ResponseMatrix& data, Eigen::Index i,
                                     const RaschParams& params) {
  check_dims(data, params);
  if (i < 0 || i >= data.n_subjects()) {
    throw ConfigError("subject index " + std::to_string(i) + " out of range");
  }
  SubjectLikelihood out;
  out.log_prob = row_log_likelihood(data, i, params);
  out.prob = std::exp(out.log_prob);
  return out;
}

Eigen::VectorXd subject_log_likelihoods(const ResponseMatrix& data, const RaschParams& params) {
  check_dims(data, params);
  Eigen::VectorXd out(data.n_subjects());
  for (Eigen::Index i = 0; i < data.n_subjects(); ++i) out(i) = row_log_likelihood(data, i, params);
  return out;
}

Eigen::MatrixXd probability_matrix(const RaschParams& params) {
  Eigen::MatrixXd p(params.theta.size(), params.b.size());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = rasch_prob(params.theta(i), params.b(j));
  }
  return p;
}

}  // namespace mfmrasch
