// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "calibatlas/error.hpp"
#include "calibatlas/rng.hpp"
#include "calibatlas/verify.hpp"

namespace calibatlas {
namespace {

constexpr double kFlagTol = 1e-6;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Smallest plane-distance from point i to any other point under unit normal a.
double min_margin(const std::vector<std::vector<double>>& pts, std::size_t i,
                  const std::vector<double>& a) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    m = std::min(m, std::abs(dot(a, diff(pts[j], pts[i]))));
  }
  return m;
}

}  // namespace

RecoveryReport recover_distribution_calibration(const PredictionDataset& data,
                                                const std::string& dist_prediction,
                                                double epsilon, std::uint64_t seed) {
  if (data.prediction_kind(dist_prediction) != PropertyValue::Kind::kDistribution) {
    fail(ErrorCode::kKindMismatch, "recovery requires a distribution-valued prediction");
  }
  if (epsilon <= 0.0) fail(ErrorCode::kBadParam, "epsilon must be positive");
  std::vector<Level> levels = data.levels(dist_prediction);
  std::size_t k = data.space()->size();
  std::vector<std::vector<double>> pts;
  pts.reserve(levels.size());
  for (const Level& l : levels) pts.push_back(l.value.distribution().weights());

  RecoveryReport report;
  report.full_dist_sup = 0.0;
  {
    DistCalibrationResult full = distribution_calibration(
        data, dist_prediction, make_full_distribution(data.space()));
    for (const auto& e : full.max_map.entries) {
      report.full_dist_sup = std::max(report.full_dist_sup, e.residual);
    }
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    // Hyperplane through point i: try difference directions, the centroid
    // direction, and seeded random directions; keep the largest margin.
    std::vector<std::vector<double>> candidates;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) candidates.push_back(diff(pts[i], pts[j]));
    }
    if (pts.size() > 1) {
      std::vector<double> centroid(k, 0.0);
      for (const auto& p : pts) {
        for (std::size_t c = 0; c < k; ++c) centroid[c] += p[c];
      }
      for (double& c : centroid) c /= static_cast<double>(pts.size());
      candidates.push_back(diff(pts[i], centroid));
    }
    for (std::size_t t = 0; t < 64; ++t) {
      std::vector<double> a(k);
      for (double& c : a) c = rng.uniform(-1.0, 1.0);
      candidates.push_back(std::move(a));
    }
    std::vector<double> best;
    double best_margin = -1.0;
    for (auto& cand : candidates) {
      double n = norm(cand);
      if (n < 1e-12) continue;
      for (double& c : cand) c /= n;
      double m = min_margin(pts, i, cand);
      if (m > best_margin) {
        best_margin = m;
        best = cand;
      }
    }
    if (pts.size() > 1 && best_margin < epsilon) {
      // Name the closest pair to make the failure actionable.
      double closest = std::numeric_limits<double>::infinity();
      std::size_t other = i;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j == i) continue;
        double d = norm(diff(pts[j], pts[i]));
        if (d < closest) {
          closest = d;
          other = j;
        }
      }
      std::ostringstream msg;
      msg << "no hyperplane separates level " << i << " from level " << other
          << " by epsilon = " << epsilon << " (best margin " << best_margin << ")";
      fail(ErrorCode::kSeparationFailure, msg.str());
    }
    if (best.empty()) best = std::vector<double>(k, 0.0);  // single level
    double b = dot(best, pts[i]);

    // Unnormalized signed mismatch per side for the two shifted thresholds;
    // side 0 is above the threshold. Only level i switches sides, so the
    // side-0 difference between the checks equals w_i (empirical_i - pred_i).
    double thresholds[2] = {b - 0.5 * epsilon, b + 0.5 * epsilon};
    std::vector<std::vector<double>> mis[2];
    double side_weight[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int t = 0; t < 2; ++t) {
      mis[t].assign(2, std::vector<double>(k, 0.0));
      for (const Record& rec : data.records()) {
        const Pmf& f = rec.predictions.at(dist_prediction).distribution();
        int side = dot(best, f.weights()) > thresholds[t] ? 0 : 1;
        side_weight[t][side] += rec.weight;
        for (std::size_t y = 0; y < k; ++y) {
          mis[t][side][y] += rec.weight * ((rec.y == y ? 1.0 : 0.0) - f[y]);
        }
      }
    }
    HyperplaneCheck check;
    check.point_index = i;
    for (int t = 0; t < 2; ++t) {
      double sup = 0.0;
      for (int side = 0; side < 2; ++side) {
        if (side_weight[t][side] <= 0.0) continue;
        for (std::size_t y = 0; y < k; ++y) {
          sup = std::max(sup, std::abs(mis[t][side][y]) / side_weight[t][side]);
        }
      }
      (t == 0 ? check.below_sup : check.above_sup) = sup;
    }
    double w_i = levels[i].weight_share * data.total_weight();
    double diff_sup = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      diff_sup = std::max(diff_sup, std::abs(mis[0][0][y] - mis[1][0][y]));
    }
    check.recovered_residual = diff_sup / w_i;
    check.flagged = check.recovered_residual > kFlagTol;
    if (check.flagged) report.flagged_levels.push_back(i);
    report.per_hyperplane.push_back(std::move(check));
  }
  bool any_flagged = !report.flagged_levels.empty();
  report.recovered = (report.full_dist_sup > kFlagTol) == any_flagged;
  return report;
}

}  // namespace calibatlas
