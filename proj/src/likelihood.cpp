#include "bae/likelihood.hpp"

#include <cmath>

namespace bae {

std::string to_string(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::Bernoulli: return "bernoulli";
    case LikelihoodKind::ContinuousBernoulli: return "cont_bernoulli";
    case LikelihoodKind::GaussianUnit: return "gaussian";
  }
  return "unknown";
}

LikelihoodKind likelihood_from_string(const std::string& name) {
  if (name == "bernoulli") return LikelihoodKind::Bernoulli;
  if (name == "cont_bernoulli") return LikelihoodKind::ContinuousBernoulli;
  if (name == "gaussian") return LikelihoodKind::GaussianUnit;
  throw ConfigError("unknown likelihood: " + name);
}

namespace {

constexpr double kTaylorHalfWidth = 1e-4;

void check_pair(const Eigen::Index nx, const Eigen::Index nh) {
  if (nx != nh) {
    throw DimensionError("x and xhat length mismatch: " + std::to_string(nx) +
                         " vs " + std::to_string(nh));
  }
  if (nx == 0) throw DimensionError("empty input");
}

void check_open_unit(const Vector& xhat) {
  if ((xhat.array() <= 0.0).any() || (xhat.array() >= 1.0).any()) {
    throw NumericError("xhat must lie strictly inside (0,1); clamp upstream");
  }
}

double bernoulli_ll_scalar(double x, double h) {
  return x * std::log(h) + (1.0 - x) * std::log(1.0 - h);
}

}  // namespace

double log_cb_normalizer(double lambda) {
  const double u = 1.0 - 2.0 * lambda;
  if (std::abs(lambda - 0.5) < kTaylorHalfWidth) {
    // log(2 atanh(u)/u) = log 2 + u^2/3 + 13 u^4/90 + O(u^6)
    const double u2 = u * u;
    return std::log(2.0) + u2 / 3.0 + 13.0 * u2 * u2 / 90.0;
  }
  return std::log(2.0 * std::atanh(u) / u);
}

double log_cb_normalizer_grad(double lambda) {
  const double u = 1.0 - 2.0 * lambda;
  if (std::abs(lambda - 0.5) < kTaylorHalfWidth) {
    // d/du of the expansion, times du/dlambda = -2.
    return -2.0 * (2.0 * u / 3.0 + 26.0 * u * u * u / 45.0);
  }
  const double atanh_u = std::atanh(u);
  return -2.0 * (1.0 / ((1.0 - u * u) * atanh_u) - 1.0 / u);
}

double bernoulli_ll(const Vector& x, const Vector& xhat) {
  check_pair(x.size(), xhat.size());
  check_open_unit(xhat);
  const double d = static_cast<double>(x.size());
  return (x.array() * xhat.array().log() +
          (1.0 - x.array()) * (1.0 - xhat.array()).log())
             .sum() /
         d;
}

double cont_bernoulli_ll(const Vector& x, const Vector& xhat) {
  double ll = bernoulli_ll(x, xhat);
  double norm = 0.0;
  for (Eigen::Index i = 0; i < xhat.size(); ++i) norm += log_cb_normalizer(xhat[i]);
  return ll + norm / static_cast<double>(xhat.size());
}

double gaussian_ll(const Vector& x, const Vector& xhat) {
  check_pair(x.size(), xhat.size());
  const double d = static_cast<double>(x.size());
  return -0.5 * (x - xhat).squaredNorm() / d;
}

double log_likelihood(LikelihoodKind kind, const Vector& x, const Vector& xhat) {
  switch (kind) {
    case LikelihoodKind::Bernoulli: return bernoulli_ll(x, xhat);
    case LikelihoodKind::ContinuousBernoulli: return cont_bernoulli_ll(x, xhat);
    case LikelihoodKind::GaussianUnit: return gaussian_ll(x, xhat);
  }
  throw ConfigError("bad likelihood kind");
}

Vector log_likelihood_rows(LikelihoodKind kind, const Matrix& x, const Matrix& xhat) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) {
    throw DimensionError("batch shape mismatch in log_likelihood_rows");
  }
  const Eigen::Index n = x.rows();
  Vector out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    out[r] = log_likelihood(kind, x.row(r).transpose(), xhat.row(r).transpose());
  }
  return out;
}

Matrix log_likelihood_grad(LikelihoodKind kind, const Matrix& x, const Matrix& xhat) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) {
    throw DimensionError("batch shape mismatch in log_likelihood_grad");
  }
  const double d = static_cast<double>(x.cols());
  Matrix g(x.rows(), x.cols());
  switch (kind) {
    case LikelihoodKind::Bernoulli:
      g = (x.array() / xhat.array() -
           (1.0 - x.array()) / (1.0 - xhat.array())) /
          d;
      break;
    case LikelihoodKind::ContinuousBernoulli: {
      g = (x.array() / xhat.array() -
           (1.0 - x.array()) / (1.0 - xhat.array())) /
          d;
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          g(r, c) += log_cb_normalizer_grad(xhat(r, c)) / d;
        }
      }
      break;
    }
    case LikelihoodKind::GaussianUnit:
      g = (x - xhat) / d;
      break;
  }
  return g;
}

namespace {

// Maximizes f over [lo, hi] by golden-section search.
double golden_max(double lo, double hi, double tol, const auto& f) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::max(f((a + b) / 2.0), std::max(fc, fd));
}

}  // namespace

std::vector<MaxLLPoint> max_ll_curve(LikelihoodKind kind, const std::vector<double>& grid) {
  std::vector<MaxLLPoint> curve;
  curve.reserve(grid.size());
  for (double x : grid) {
    if (x < 0.0 || x > 1.0) throw DimensionError("grid value outside [0,1]");
    double best = 0.0;
    switch (kind) {
      case LikelihoodKind::Bernoulli:
        // Maximum sits at xhat = x; the boundary limit of the entropy is 0.
        best = (x <= 0.0 || x >= 1.0) ? 0.0 : bernoulli_ll_scalar(x, x);
        break;
      case LikelihoodKind::ContinuousBernoulli:
        best = golden_max(kClampLo, kClampHi, 1e-10, [x](double h) {
          return bernoulli_ll_scalar(x, h) + log_cb_normalizer(h);
        });
        break;
      case LikelihoodKind::GaussianUnit:
        best = 0.0;
        break;
    }
    curve.push_back({x, best});
  }
  return curve;
}

}  // namespace bae
