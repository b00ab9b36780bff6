#ifndef MFMRASCH_RANDOM_HPP
#define MFMRASCH_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace mfmrasch {

// Every sampling routine takes an explicit stream; a fixed seed reproduces
// a run bit-for-bit on the same platform.
using Rng = std::mt19937_64;

// Mixes a base seed with a list of tags (replicate index, variant, ...)
// into an independent-looking 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

// Uniform on the open interval (0, 1).
double sample_uniform(Rng& rng);
double sample_normal(Rng& rng, double mean, double sd);
double sample_exponential(Rng& rng, double rate);
// Shape/rate parameterisation: mean = shape / rate.
double sample_gamma(Rng& rng, double shape, double rate);
double sample_beta(Rng& rng, double a, double b);
int sample_poisson(Rng& rng, double mean);
Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& alpha);

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

// Index drawn with probability proportional to exp(log_weights).
Eigen::Index sample_categorical_log(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& log_weights);

}  // namespace mfmrasch

#endif  // MFMRASCH_RANDOM_HPP
