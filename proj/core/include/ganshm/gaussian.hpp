#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ganshm/signal.hpp"

namespace ganshm {

// Full-covariance joint Gaussian over low-dimensional features, with the
// Cholesky factor and log-determinant cached for scoring.
struct JointGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double lambda = 0.0;            // diagonal shrinkage included in covariance
  double training_mean_nl = 0.0;  // mean negative log-likelihood of the fit set
  Eigen::MatrixXd chol_lower;     // L with L L^T = covariance
  double log_det = 0.0;

  Eigen::Index dim() const { return mean.size(); }
};

// Maximum-likelihood fit (sample mean, sample covariance) with diagonal
// shrinkage lambda = shrinkage * trace(S)/dim added for invertibility; for
// data with zero sample variance the shrinkage itself is used as the floor.
// training_mean_nl is the mean negative log-likelihood over the fit set.
// Throws InvalidParameter with fewer than 2 samples.
JointGaussian fit_joint_gaussian(const Eigen::MatrixXd& samples, double shrinkage = 1e-6);

// Builds a model directly from known parameters; training_mean_nl must be
// supplied by the caller if score() is to be used.
JointGaussian make_joint_gaussian(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& covariance,
                                  double training_mean_nl = 0.0);

// NL(x) = 0.5 * [ (x-mu)^T Sigma^-1 (x-mu) + logdet Sigma + d log 2pi ].
double negative_log_likelihood(const JointGaussian& model, const Eigen::VectorXd& x);

// NL(f2) divided by the training-set mean NL; averages to exactly 1 over the
// training set. Throws DegenerateModel when the training mean is zero.
double s_1cg(const JointGaussian& model, const FeatureII& f2);

struct GmmComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

// Two-component 1-D Gaussian mixture, components ordered by ascending mean.
struct Gmm2 {
  GmmComponent low;
  GmmComponent high;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> ll_trace;  // per-iteration log-likelihood, non-decreasing
};

// EM fit initialized by splitting the sorted samples at the median. Runs
// until the log-likelihood improves by less than 1e-8 or 500 iterations.
// The seed feeds re-initialization if a component collapses; the default
// median-split path is fully deterministic. Throws InvalidParameter with
// fewer than 4 samples and DegenerateFit when all samples are identical.
Gmm2 fit_gmm2(const std::vector<double>& samples, std::uint64_t seed = 0);

// Posterior probability that x belongs to the higher-mean component.
double gmm2_upper_responsibility(const Gmm2& fit, double x);

}  // namespace ganshm
