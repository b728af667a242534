#include "conedet/vision/evaluate.hpp"

#include <chrono>
#include <stdexcept>

namespace conedet::vision {

double ConfusionCounts::accuracy() const {
  return total() > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
}
double ConfusionCounts::tpr() const { return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
double ConfusionCounts::fpr() const { return fp + tn > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }

EvalResult evaluate(const Scorer& scorer, double threshold, std::span<const CropSample> corpus) {
  if (corpus.empty()) throw std::invalid_argument("evaluate: empty corpus");
  EvalResult r;
  r.scores.resize(corpus.size());
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < corpus.size(); ++i) r.scores[i] = scorer(corpus[i].image);
  const auto t1 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool predicted = r.scores[i] >= threshold;
    const bool actual = corpus[i].label == Label::cone;
    if (predicted && actual) ++r.counts.tp;
    else if (predicted) ++r.counts.fp;
    else if (actual) ++r.counts.fn;
    else ++r.counts.tn;
  }
  r.accuracy = r.counts.accuracy();
  r.tpr = r.counts.tpr();
  r.fpr = r.counts.fpr();
  r.mean_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(corpus.size());
  return r;
}

nlohmann::json metrics_json(const EvalResult& r) {
  return {{"accuracy", r.accuracy},
          {"tpr", r.tpr},
          {"fpr", r.fpr},
          {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
          {"mean_ms", r.mean_ms}};
}

double prefiltered_cnn(const RgbImage& crop, const CnnClassifier& cnn, const PrefilterParams& p) {
  if (!colour_match(crop, p.colour) && !triangle_score(crop, p.triangle).match) return 0.0;
  return cnn.score(crop);
}

Scorer colour_scorer(ColourParams p) {
  return [p](const RgbImage& img) { return colour_score(img, p); };
}

Scorer triangle_scorer(TriangleParams p) {
  return [p](const RgbImage& img) { return triangle_score(img, p).match ? 1.0 : 0.0; };
}

Scorer cnn_scorer(const CnnClassifier& cnn) {
  return [&cnn](const RgbImage& img) { return cnn.score(img); };
}

Scorer prefiltered_scorer(const CnnClassifier& cnn, PrefilterParams p) {
  return [&cnn, p](const RgbImage& img) { return prefiltered_cnn(img, cnn, p); };
}

}  // namespace conedet::vision
