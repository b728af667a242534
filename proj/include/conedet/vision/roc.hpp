#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace conedet::vision {

struct ScoredSample {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double threshold = 0.0;  // predict positive when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Sweep from the strictest threshold (+inf, origin) down through every
/// distinct score, so thresholds descend and both rates ascend.
struct RocCurve {
  std::vector<RocPoint> points;
  double operating_threshold = 0.0;
  double operating_fpr = 0.0;
  double operating_tpr = 0.0;

  /// Trapezoidal area under the curve.
  double auc() const;
};

/// Operating point: highest TPR with FPR <= max_fpr; ties go to the lower
/// FPR, then the higher threshold. Throws unless both labels are present.
RocCurve roc_and_operating_point(std::span<const ScoredSample> samples, double max_fpr = 0.05);

nlohmann::json to_json(const RocCurve& roc);

}  // namespace conedet::vision
