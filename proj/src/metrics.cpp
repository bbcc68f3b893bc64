#include "bae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bae/likelihood.hpp"

namespace bae {

namespace {

void check_nonempty(const std::vector<double>& ood, const std::vector<double>& in) {
  if (ood.empty() || in.empty()) {
    throw DimensionError("score lists must be nonempty");
  }
}

}  // namespace

double auroc(const std::vector<double>& scores_ood, const std::vector<double>& scores_in) {
  check_nonempty(scores_ood, scores_in);
  const size_t n_out = scores_ood.size();
  const size_t n_in = scores_in.size();

  std::vector<std::pair<double, bool>> pooled;  // (score, is_ood)
  pooled.reserve(n_out + n_in);
  for (double s : scores_ood) pooled.emplace_back(s, true);
  for (double s : scores_in) pooled.emplace_back(s, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks across ties, then the Mann-Whitney U statistic.
  double rank_sum_ood = 0.0;
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (size_t k = i; k < j; ++k) {
      if (pooled[k].second) rank_sum_ood += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum_ood - 0.5 * static_cast<double>(n_out) * (n_out + 1);
  return u / (static_cast<double>(n_out) * static_cast<double>(n_in));
}

double auprc(const std::vector<double>& scores_ood, const std::vector<double>& scores_in) {
  check_nonempty(scores_ood, scores_in);
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(scores_ood.size() + scores_in.size());
  for (double s : scores_ood) pooled.emplace_back(s, true);
  for (double s : scores_in) pooled.emplace_back(s, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double total_pos = static_cast<double>(scores_ood.size());
  double tp = 0.0, fp = 0.0;
  double prev_recall = 0.0;
  double area = 0.0;
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    for (size_t k = i; k < j; ++k) {
      if (pooled[k].second) tp += 1.0;
      else fp += 1.0;
    }
    const double recall = tp / total_pos;
    const double precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double fpr_at_tpr(const std::vector<double>& scores_ood,
                  const std::vector<double>& scores_in, double tpr_target) {
  check_nonempty(scores_ood, scores_in);
  if (tpr_target <= 0.0 || tpr_target > 1.0) {
    throw DimensionError("tpr_target must lie in (0,1]");
  }
  std::vector<double> thresholds = scores_ood;
  thresholds.insert(thresholds.end(), scores_in.begin(), scores_in.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n_out = static_cast<double>(scores_ood.size());
  const double n_in = static_cast<double>(scores_in.size());
  double best = 1.0;
  for (double t : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (double s : scores_ood) tp += (s >= t) ? 1.0 : 0.0;
    for (double s : scores_in) fp += (s >= t) ? 1.0 : 0.0;
    if (tp / n_out >= tpr_target) best = std::min(best, fp / n_in);
  }
  return best;
}

EvalResult evaluate(const std::vector<double>& scores_ood,
                    const std::vector<double>& scores_in) {
  EvalResult r;
  r.auroc = auroc(scores_ood, scores_in);
  r.auprc = auprc(scores_ood, scores_in);
  r.fpr80 = fpr_at_tpr(scores_ood, scores_in, 0.8);
  r.n_out = static_cast<long>(scores_ood.size());
  r.n_in = static_cast<long>(scores_in.size());
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("pearson inputs differ in length");
  if (a.size() < 2) throw DimensionError("pearson needs at least two points");
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw DegenerateInputError("pearson: zero variance input");
  }
  return cov / std::sqrt(var_a * var_b);
}

double proportion_zeros(const Vector& x) {
  if (x.size() == 0) throw DimensionError("empty image");
  const double threshold = 1.0 / 255.0;
  return static_cast<double>((x.array() <= threshold).count()) /
         static_cast<double>(x.size());
}

double ssim(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("ssim images differ in shape");
  }
  constexpr int kWin = 7;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  if (x.rows() < kWin || x.cols() < kWin) {
    throw DimensionError("ssim window larger than image");
  }
  const double n = kWin * kWin;
  double total = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i + kWin <= x.rows(); ++i) {
    for (Eigen::Index j = 0; j + kWin <= x.cols(); ++j) {
      const auto px = x.block(i, j, kWin, kWin).array();
      const auto py = y.block(i, j, kWin, kWin).array();
      const double mx = px.mean();
      const double my = py.mean();
      const double vx = (px - mx).square().sum() / n;
      const double vy = (py - my).square().sum() / n;
      const double cxy = ((px - mx) * (py - my)).sum() / n;
      total += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double nmi(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("nmi images differ in shape");
  }
  constexpr int kBins = 32;
  const Eigen::Index n = x.size();
  if (n == 0) throw DimensionError("empty image");

  auto bin_of = [](double v) {
    int b = static_cast<int>(std::floor(v * kBins));
    return std::clamp(b, 0, kBins - 1);
  };

  std::vector<double> joint(kBins * kBins, 0.0);
  std::vector<double> px(kBins, 0.0), py(kBins, 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const int bx = bin_of(x(i, j));
      const int by = bin_of(y(i, j));
      joint[bx * kBins + by] += 1.0;
      px[bx] += 1.0;
      py[by] += 1.0;
    }
  }
  const double total = static_cast<double>(n);
  double hx = 0.0, hy = 0.0, mi = 0.0;
  for (int b = 0; b < kBins; ++b) {
    if (px[b] > 0.0) hx -= (px[b] / total) * std::log(px[b] / total);
    if (py[b] > 0.0) hy -= (py[b] / total) * std::log(py[b] / total);
  }
  if (hx == 0.0 || hy == 0.0) {
    throw DegenerateInputError("nmi: constant image has zero entropy");
  }
  for (int bx = 0; bx < kBins; ++bx) {
    for (int by = 0; by < kBins; ++by) {
      const double pj = joint[bx * kBins + by] / total;
      if (pj > 0.0) {
        mi += pj * std::log(pj / ((px[bx] / total) * (py[by] / total)));
      }
    }
  }
  return 2.0 * mi / (hx + hy);
}

SimilarityScores similarity_scores(const Matrix& reference, const Matrix& reconstruction) {
  if (reference.rows() != reconstruction.rows() ||
      reference.cols() != reconstruction.cols()) {
    throw DimensionError("similarity images differ in shape");
  }
  SimilarityScores s;
  Matrix recon = reconstruction.array().min(kClampHi).max(kClampLo);
  Vector ref_flat = Eigen::Map<const Vector>(reference.data(), reference.size());
  Vector rec_flat = Eigen::Map<const Vector>(recon.data(), recon.size());
  s.neg_bce = bernoulli_ll(ref_flat, rec_flat);
  s.neg_mse = -(reference - reconstruction).array().square().mean();
  s.ssim = ssim(reference, reconstruction);
  s.nmi = nmi(reference, reconstruction);
  return s;
}

std::vector<HistogramRow> paired_histogram(const std::vector<double>& values_in,
                                           const std::vector<double>& values_out,
                                           int bins) {
  if (bins < 1) throw DimensionError("histogram needs at least one bin");
  if (values_in.empty() && values_out.empty()) return {};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values_in) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : values_out) { lo = std::min(lo, v); hi = std::max(hi, v); }
  if (lo == hi) hi = lo + 1.0;  // all values equal; one degenerate bin range
  const double width = (hi - lo) / bins;
  std::vector<HistogramRow> rows(bins);
  for (int b = 0; b < bins; ++b) {
    rows[b].bin_left = lo + b * width;
    rows[b].bin_right = lo + (b + 1) * width;
  }
  auto drop = [&](double v) {
    int b = static_cast<int>((v - lo) / width);
    return std::clamp(b, 0, bins - 1);
  };
  for (double v : values_in) rows[drop(v)].count_in++;
  for (double v : values_out) rows[drop(v)].count_out++;
  return rows;
}

}  // namespace bae
