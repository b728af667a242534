#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/vision/cnn.hpp"
#include "conedet/vision/colour.hpp"
#include "conedet/vision/corpus.hpp"
#include "conedet/vision/triangle.hpp"

namespace conedet::vision {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  double tpr() const;  // 0 when there are no positives
  double fpr() const;  // 0 when there are no negatives
};

struct EvalResult {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double mean_ms = 0.0;  // wall clock per image
  std::vector<double> scores;
};

/// Image -> score; predicted positive when score >= threshold.
using Scorer = std::function<double(const RgbImage&)>;

/// Scores every crop, timing the whole pass. Throws on an empty corpus.
EvalResult evaluate(const Scorer& scorer, double threshold, std::span<const CropSample> corpus);

/// {accuracy, tpr, fpr, counts: {tp, fp, tn, fn}, mean_ms}
nlohmann::json metrics_json(const EvalResult& r);

struct PrefilterParams {
  ColourParams colour;
  TriangleParams triangle;
};

/// Cheap gate in front of the network: a crop that fails the colour test and
/// shows no triangle scores 0 without running the CNN.
double prefiltered_cnn(const RgbImage& crop, const CnnClassifier& cnn, const PrefilterParams& p = {});

Scorer colour_scorer(ColourParams p = {});
/// 1 on a triangle match, else 0.
Scorer triangle_scorer(TriangleParams p = {});
Scorer cnn_scorer(const CnnClassifier& cnn);
Scorer prefiltered_scorer(const CnnClassifier& cnn, PrefilterParams p = {});

}  // namespace conedet::vision
