#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "conedet/image.hpp"
#include "conedet/sim_world.hpp"
#include "conedet/vision/cnn.hpp"
#include "conedet/vision/crop.hpp"

namespace conedet::vision {

struct CropSample {
  RgbImage image;  // input_size x input_size
  Label label = Label::not_cone;
  std::string source_id;
};

struct CorpusOptions {
  int n_per_class = 100;
  std::uint64_t seed = 1;
  double light = 1.0;
  double light_jitter = 0.25;  // light drawn uniformly from light +/- jitter
  double min_distance = 2.0;
  double max_distance = 38.0;
  double max_bearing_deg = 30.0;
  double candidate_jitter = 0.08;  // stddev of the simulated LiDAR centroid error [m]
  double clutter_probability = 0.5;
  CropParams crop;
};

/// Renders positive crops (cones at varied range and bearing) and negative
/// crops (reflector plates, boxes, empty background) through the same crop
/// path the pipeline uses. Camera and LiDAR mount come from `base`; its
/// objects are ignored. Deterministic per seed.
std::vector<CropSample> make_corpus(const sim::Scenario& base, const CorpusOptions& opt);

/// Writes <id>.ppm files plus labels.csv (filename,label).
void save_corpus(const std::filesystem::path& dir, std::span<const CropSample> samples);
std::vector<CropSample> load_corpus(const std::filesystem::path& dir);

std::vector<LabSample> to_lab_samples(std::span<const CropSample> samples);

std::string to_string(Label label);
Label label_from_string(const std::string& s);

}  // namespace conedet::vision
