#pragma once

#include <vector>

#include "bae/types.hpp"

namespace bae {

struct EvalResult {
  double auroc = 0.0;
  double auprc = 0.0;
  double fpr80 = 0.0;
  long n_in = 0;
  long n_out = 0;
};

// Rank statistic P(s_out > s_in) + 0.5 P(s_out == s_in); exact under ties.
// Higher score = more OOD.
double auroc(const std::vector<double>& scores_ood, const std::vector<double>& scores_in);

// Area under precision-recall with OOD as the positive class, step
// interpolation over all distinct thresholds.
double auprc(const std::vector<double>& scores_ood, const std::vector<double>& scores_in);

// Minimal false-positive rate among thresholds reaching TPR >= tpr_target.
double fpr_at_tpr(const std::vector<double>& scores_ood,
                  const std::vector<double>& scores_in, double tpr_target = 0.8);

EvalResult evaluate(const std::vector<double>& scores_ood,
                    const std::vector<double>& scores_in);

// Standard Pearson correlation; throws DegenerateInputError when either
// input has zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Fraction of pixels <= 1/255 (an 8-bit zero after divide-by-255).
double proportion_zeros(const Vector& x);

// Mean local SSIM with a 7x7 uniform window, C1=(0.01)^2, C2=(0.03)^2,
// dynamic range 1. Images are [H, W] matrices with values in [0,1].
double ssim(const Matrix& x, const Matrix& y);

// 2 I(X;Y) / (H(X)+H(Y)) over 32-bin joint intensity histograms.
double nmi(const Matrix& x, const Matrix& y);

struct SimilarityScores {
  double neg_bce = 0.0;
  double neg_mse = 0.0;
  double ssim = 0.0;
  double nmi = 0.0;
};

// Image-similarity panel between a reference image and a reconstruction;
// the reconstruction is clamped into (0,1) before the BCE term.
SimilarityScores similarity_scores(const Matrix& reference, const Matrix& reconstruction);

struct HistogramRow {
  double bin_left = 0.0;
  double bin_right = 0.0;
  long count_in = 0;
  long count_out = 0;
};

// Shared-range histogram of two samples, for score-distribution plots.
std::vector<HistogramRow> paired_histogram(const std::vector<double>& values_in,
                                           const std::vector<double>& values_out,
                                           int bins = 30);

}  // namespace bae
