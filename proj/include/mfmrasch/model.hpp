#ifndef MFMRASCH_MODEL_HPP
#define MFMRASCH_MODEL_HPP

#include <cmath>

#include <Eigen/Core>

#include "mfmrasch/data.hpp"

namespace mfmrasch {

// log(1 + exp(x)) without overflow.
template <typename Scalar>
inline Scalar log1p_exp(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

// Logistic function, branch form keeps exp() argument non-positive.
template <typename Scalar>
inline Scalar logistic(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

// P(y = 1 | theta, b) under the Rasch model.
template <typename Scalar>
inline Scalar rasch_prob(Scalar theta, Scalar b) {
  return logistic(theta - b);
}

// log P(y | logit) for y in {0, 1}: y * logit - log(1 + exp(logit)).
template <typename Scalar>
inline Scalar bernoulli_logit_log_prob(int y, Scalar logit) {
  return (y != 0 ? logit : Scalar(0)) - log1p_exp(logit);
}

struct RaschParams {
  Eigen::VectorXd theta;  // abilities, length N
  Eigen::VectorXd b;      // difficulties, length J
};

double log_likelihood(const ResponseMatrix& data, const RaschParams& params);

struct SubjectLikelihood {
  double prob = 0.0;
  double log_prob = 0.0;
};

SubjectLikelihood subject_likelihood(const ResponseMatrix& data, Eigen::Index i,
                                     const RaschParams& params);

// Row-wise log-likelihoods; sums to log_likelihood().
Eigen::VectorXd subject_log_likelihoods(const ResponseMatrix& data, const RaschParams& params);

// N x J matrix of fitted P(y_ij = 1).
Eigen::MatrixXd probability_matrix(const RaschParams& params);

}  // namespace mfmrasch

#endif  // MFMRASCH_MODEL_HPP
