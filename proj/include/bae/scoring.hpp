#pragma once

#include <vector>

#include "bae/likelihood.hpp"
#include "bae/types.hpp"

namespace bae {

// Per-input OOD detection quantities. Scores are oriented so that higher
// means more OOD; E(LL) and WAIC are negated for that reason and never
// auto-flipped.
struct ScoreReport {
  double e_ll = 0.0;
  double var_ll = 0.0;
  double waic = 0.0;
  double mean_pred_var = 0.0;
  double score_e_ll = 0.0;      // -e_ll
  double score_var_ll = 0.0;    // +var_ll
  double score_waic = 0.0;      // -waic
  double score_var_xhat = 0.0;  // +mean_pred_var
};

// Elementwise mean and population variance (divide by T) across posterior
// samples. Variance is exactly zero wherever all samples agree bitwise.
void predictive_moments(const std::vector<Matrix>& samples, Matrix& mean, Matrix& var);

// Mean and population variance of the per-row LL across samples;
// x is [N, D], each sample is a reconstruction of the same batch.
void ll_moments(const Matrix& x, const std::vector<Matrix>& samples,
                LikelihoodKind kind, Vector& e_ll, Vector& var_ll);

double waic(double e_ll, double var_ll);

// Fills the four raw quantities' derived scores.
ScoreReport ood_scores(double e_ll, double var_ll, double mean_pred_var);

// Full per-row reports for a batch given its T posterior reconstructions.
std::vector<ScoreReport> score_batch(const Matrix& x, const std::vector<Matrix>& samples,
                                     LikelihoodKind kind);

}  // namespace bae
