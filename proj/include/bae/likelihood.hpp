#pragma once

#include <string>
#include <vector>

#include "bae/types.hpp"

namespace bae {

enum class LikelihoodKind { Bernoulli, ContinuousBernoulli, GaussianUnit };

std::string to_string(LikelihoodKind kind);
LikelihoodKind likelihood_from_string(const std::string& name);

// Reconstructions are clamped into this interval before any log is taken.
inline constexpr double kClampLo = 1e-7;
inline constexpr double kClampHi = 1.0 - 1e-7;

// log C(lambda) for the continuous Bernoulli normalizer,
// C(lambda) = 2 atanh(1 - 2 lambda) / (1 - 2 lambda), C(1/2) = 2.
// Switches to a Taylor expansion for |lambda - 1/2| < 1e-4.
double log_cb_normalizer(double lambda);

// d/d lambda of log_cb_normalizer, with the matching Taylor branch.
double log_cb_normalizer_grad(double lambda);

// Mean log-likelihood per pixel (nats). x in [0,1], xhat in (0,1).
double bernoulli_ll(const Vector& x, const Vector& xhat);
double cont_bernoulli_ll(const Vector& x, const Vector& xhat);
double gaussian_ll(const Vector& x, const Vector& xhat);

double log_likelihood(LikelihoodKind kind, const Vector& x, const Vector& xhat);

// One LL value per row of the batch.
Vector log_likelihood_rows(LikelihoodKind kind, const Matrix& x, const Matrix& xhat);

// d LL / d xhat, elementwise, same reduction (1/D) as the LL itself.
Matrix log_likelihood_grad(LikelihoodKind kind, const Matrix& x, const Matrix& xhat);

struct MaxLLPoint {
  double x;
  double max_ll;
};

// Best achievable LL at each grid value when xhat ranges over the clamp
// interval. Bernoulli has the closed form x log x + (1-x) log(1-x) with the
// boundary limit 0; the continuous Bernoulli maximum is found by
// golden-section search; the unit Gaussian maximum is 0 everywhere.
std::vector<MaxLLPoint> max_ll_curve(LikelihoodKind kind, const std::vector<double>& grid);

}  // namespace bae
