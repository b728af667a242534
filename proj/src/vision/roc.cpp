#include "conedet/vision/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conedet::vision {

double RocCurve::auc() const {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * 0.5 * (points[i].tpr + points[i - 1].tpr);
  return area;
}

RocCurve roc_and_operating_point(std::span<const ScoredSample> samples, double max_fpr) {
  std::size_t pos = 0, neg = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw std::invalid_argument("roc: non-finite score");
    (s.positive ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc: both labels must be present");

  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredSample& a, const ScoredSample& b) { return a.score > b.score; });

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) (sorted[i].positive ? tp : fp) += 1;
    roc.points.push_back({t, static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
  }

  const RocPoint* best = nullptr;
  for (const auto& p : roc.points) {
    if (p.fpr > max_fpr) continue;
    if (!best || p.tpr > best->tpr || (p.tpr == best->tpr && p.fpr < best->fpr) ||
        (p.tpr == best->tpr && p.fpr == best->fpr && p.threshold > best->threshold))
      best = &p;
  }
  roc.operating_threshold = best->threshold;
  roc.operating_fpr = best->fpr;
  roc.operating_tpr = best->tpr;
  return roc;
}

nlohmann::json to_json(const RocCurve& roc) {
  auto thr = [](double t) { return std::isfinite(t) ? nlohmann::json(t) : nlohmann::json(nullptr); };
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : roc.points) pts.push_back({{"threshold", thr(p.threshold)}, {"fpr", p.fpr}, {"tpr", p.tpr}});
  return {{"points", pts},
          {"auc", roc.auc()},
          {"operating_point", {{"threshold", thr(roc.operating_threshold)}, {"fpr", roc.operating_fpr}, {"tpr", roc.operating_tpr}}}};
}

}  // namespace conedet::vision
