#include "conedet/vision/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace conedet::vision {

using Matrix = Eigen::MatrixXd;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Configuration

void ClassifierConfig::validate() const {
  if (input_size < 1) throw std::invalid_argument("classifier: input_size must be positive");
  if (conv_layers.empty()) throw std::invalid_argument("classifier: at least one conv layer required");
  if (fc_widths.empty()) throw std::invalid_argument("classifier: at least one fc layer required");
  if (l1_lambda < 0.0) throw std::invalid_argument("classifier: l1_lambda must be >= 0");
  if (pool < 1) throw std::invalid_argument("classifier: pool must be >= 1");
  if (batch_size < 1 || iterations < 0) throw std::invalid_argument("classifier: bad training schedule");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("classifier: dropout must lie in [0, 1)");
  int size = input_size;
  for (const auto& c : conv_layers) {
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1) throw std::invalid_argument("classifier: bad conv layer");
    if (size < c.kernel) throw std::invalid_argument("classifier: conv kernel larger than its input");
    size = ((size - c.kernel) / c.stride + 1) / pool;
    if (size < 1) throw std::invalid_argument("classifier: feature map vanishes; reduce depth or pooling");
  }
  for (int w : fc_widths)
    if (w < 1) throw std::invalid_argument("classifier: fc widths must be positive");
}

nlohmann::json to_json(const ClassifierConfig& c) {
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& l : c.conv_layers) conv.push_back({{"filters", l.filters}, {"kernel", l.kernel}, {"stride", l.stride}});
  return {{"input_size", c.input_size}, {"conv_layers", conv},          {"pool", c.pool},
          {"fc_widths", c.fc_widths},   {"l1_lambda", c.l1_lambda},    {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size}, {"iterations", c.iterations}, {"dropout", c.dropout},
          {"rng_seed", c.rng_seed}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.input_size = j.value("input_size", c.input_size);
  if (j.contains("conv_layers")) {
    c.conv_layers.clear();
    for (const auto& l : j["conv_layers"])
      c.conv_layers.push_back({l.at("filters").get<int>(), l.at("kernel").get<int>(), l.value("stride", 1)});
  }
  c.pool = j.value("pool", c.pool);
  if (j.contains("fc_widths")) c.fc_widths = j["fc_widths"].get<std::vector<int>>();
  c.l1_lambda = j.value("l1_lambda", c.l1_lambda);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.iterations = j.value("iterations", c.iterations);
  c.dropout = j.value("dropout", c.dropout);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.validate();
  return c;
}

std::string ClassifierConfig::hash() const {
  nlohmann::json arch = to_json(*this);
  for (const char* k : {"l1_lambda", "learning_rate", "batch_size", "iterations", "dropout", "rng_seed"}) arch.erase(k);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : arch.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Layer geometry

namespace {

struct ConvGeom {
  int in_c, in_h, kernel, stride, filters, out_h, pool_h;
};

struct Geometry {
  std::vector<ConvGeom> conv;
  std::vector<std::pair<int, int>> fc;  // (in, out), output layer last
};

Geometry geometry_of(const ClassifierConfig& cfg) {
  Geometry g;
  int c = 3, h = cfg.input_size;
  for (const auto& l : cfg.conv_layers) {
    const int out_h = (h - l.kernel) / l.stride + 1;
    const int pool_h = out_h / cfg.pool;
    g.conv.push_back({c, h, l.kernel, l.stride, l.filters, out_h, pool_h});
    c = l.filters;
    h = pool_h;
  }
  int in = c * h * h;
  for (int w : cfg.fc_widths) {
    g.fc.emplace_back(in, w);
    in = w;
  }
  g.fc.emplace_back(in, 2);
  return g;
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Maps LAB into roughly [-1, 1] per channel, channel-major [c][y][x].
void write_input(const LabImage& lab, Matrix& a0, int sample) {
  const int hw = lab.width * lab.height;
  for (int p = 0; p < hw; ++p) {
    a0(0, sample * hw + p) = lab.data[3 * p] / 50.0 - 1.0;
    a0(1, sample * hw + p) = lab.data[3 * p + 1] / 128.0;
    a0(2, sample * hw + p) = lab.data[3 * p + 2] / 128.0;
  }
}

struct ConvCache {
  Matrix col;
  Matrix z;
  std::vector<int> argmax;
};

struct FcCache {
  Matrix in;
  Matrix z;
  Matrix mask;  // dropout scale per activation; empty when inactive
};

// Forward/backward over one batch. Activations are (channels x B*H*W) with
// sample-major column blocks.
class Network {
 public:
  explicit Network(const ModelWeights& w) : w_(w), geom_(geometry_of(w.config)) {
    // Eigen sums in an alignment-dependent order; aligned copies keep
    // training bitwise reproducible.
    for (std::size_t l = 0; l < w.layers.size(); l += 2) {
      const Tensor& t = w.layers[l];
      const Eigen::Index rows = t.shape.front();
      const Eigen::Index cols = static_cast<Eigen::Index>(t.data.size()) / rows;
      weights_.push_back(RowMajorMap(t.data.data(), rows, cols));
    }
  }

  Matrix forward(const Matrix& input, int batch, std::mt19937_64* dropout_rng = nullptr) {
    conv_.assign(geom_.conv.size(), {});
    fc_.assign(geom_.fc.size(), {});
    batch_ = batch;
    Matrix a = input;
    const int pool = w_.config.pool;
    for (std::size_t l = 0; l < geom_.conv.size(); ++l) {
      const ConvGeom& g = geom_.conv[l];
      ConvCache& cc = conv_[l];
      const int k = g.kernel, s = g.stride, oh = g.out_h, ih = g.in_h;
      const int rows = g.in_c * k * k;
      cc.col.resize(rows, static_cast<Eigen::Index>(batch) * oh * oh);
      for (int b = 0; b < batch; ++b)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < oh; ++ox) {
            double* dst = cc.col.col(static_cast<Eigen::Index>(b) * oh * oh + oy * oh + ox).data();
            for (int c = 0; c < g.in_c; ++c)
              for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                  *dst++ = a(c, static_cast<Eigen::Index>(b) * ih * ih + (oy * s + ky) * ih + ox * s + kx);
          }
      const RowMajorMatrix& wm = weights_[l];
      const Eigen::Map<const Eigen::VectorXd> bias(w_.layers[2 * l + 1].data.data(), g.filters);
      cc.z.noalias() = wm * cc.col;
      cc.z.colwise() += bias;

      const int ph = g.pool_h;
      Matrix pooled(g.filters, static_cast<Eigen::Index>(batch) * ph * ph);
      cc.argmax.assign(static_cast<std::size_t>(pooled.size()), 0);
      for (int b = 0; b < batch; ++b)
        for (int py = 0; py < ph; ++py)
          for (int px = 0; px < ph; ++px) {
            const Eigen::Index out_col = static_cast<Eigen::Index>(b) * ph * ph + py * ph + px;
            for (int f = 0; f < g.filters; ++f) {
              double best = -std::numeric_limits<double>::infinity();
              int best_col = 0;
              for (int dy = 0; dy < pool; ++dy)
                for (int dx = 0; dx < pool; ++dx) {
                  const int in_col = b * oh * oh + (py * pool + dy) * oh + px * pool + dx;
                  const double v = std::max(0.0, cc.z(f, in_col));  // ReLU before pooling
                  if (v > best) {
                    best = v;
                    best_col = in_col;
                  }
                }
              pooled(f, out_col) = best;
              cc.argmax[static_cast<std::size_t>(out_col) * g.filters + f] = best_col;
            }
          }
      a = std::move(pooled);
    }

    // Flatten to (features x batch), feature order [c][y][x].
    const ConvGeom& last = geom_.conv.back();
    const int ph = last.pool_h;
    Matrix x(static_cast<Eigen::Index>(last.filters) * ph * ph, batch);
    for (int b = 0; b < batch; ++b)
      for (int f = 0; f < last.filters; ++f)
        for (int p = 0; p < ph * ph; ++p) x(f * ph * ph + p, b) = a(f, b * ph * ph + p);

    const std::size_t conv_params = 2 * geom_.conv.size();
    for (std::size_t l = 0; l < geom_.fc.size(); ++l) {
      const auto [in, out] = geom_.fc[l];
      FcCache& fc = fc_[l];
      const RowMajorMatrix& wm = weights_[geom_.conv.size() + l];
      const Eigen::Map<const Eigen::VectorXd> bias(w_.layers[conv_params + 2 * l + 1].data.data(), out);
      fc.in = x;
      fc.z.noalias() = wm * x;
      fc.z.colwise() += bias;
      if (l + 1 == geom_.fc.size()) {
        x = fc.z;
      } else {
        x = fc.z.cwiseMax(0.0);
        if (dropout_rng && w_.config.dropout > 0.0) {
          const double keep = 1.0 - w_.config.dropout;
          std::bernoulli_distribution bern(keep);
          fc.mask.resize(x.rows(), x.cols());
          for (Eigen::Index i = 0; i < fc.mask.size(); ++i) fc.mask.data()[i] = bern(*dropout_rng) ? 1.0 / keep : 0.0;
          x = x.cwiseProduct(fc.mask);
        }
      }
    }

    // Column-wise softmax.
    Matrix prob(2, batch);
    for (int b = 0; b < batch; ++b) {
      const double m = std::max(x(0, b), x(1, b));
      const double e0 = std::exp(x(0, b) - m), e1 = std::exp(x(1, b) - m);
      prob(0, b) = e0 / (e0 + e1);
      prob(1, b) = e1 / (e0 + e1);
    }
    return prob;
  }

  // Gradients of the mean cross-entropy, same layout as the weights.
  std::vector<std::vector<double>> backward(const Matrix& prob, const std::vector<int>& labels) {
    std::vector<std::vector<double>> grad(w_.layers.size());
    const int batch = batch_;
    Matrix dz = prob;
    for (int b = 0; b < batch; ++b) dz(labels[b], b) -= 1.0;
    dz /= static_cast<double>(batch);

    const std::size_t conv_params = 2 * geom_.conv.size();
    Matrix dx;
    for (std::size_t l = geom_.fc.size(); l-- > 0;) {
      const auto [in, out] = geom_.fc[l];
      FcCache& fc = fc_[l];
      if (l + 1 != geom_.fc.size()) {
        if (fc.mask.size() > 0) dz = dz.cwiseProduct(fc.mask);
        dz = dz.cwiseProduct((fc.z.array() > 0.0).cast<double>().matrix());
      }
      auto& gw = grad[conv_params + 2 * l];
      auto& gb = grad[conv_params + 2 * l + 1];
      gw.resize(static_cast<std::size_t>(out) * in);
      gb.resize(out);
      const RowMajorMatrix dw = dz * fc.in.transpose();
      std::copy(dw.data(), dw.data() + dw.size(), gw.begin());
      const Eigen::VectorXd db = dz.rowwise().sum();
      std::copy(db.data(), db.data() + out, gb.begin());
      const RowMajorMatrix& wm = weights_[geom_.conv.size() + l];
      dx = wm.transpose() * dz;
      dz = dx;
    }

    // Unflatten into the last pooled map.
    const ConvGeom& last = geom_.conv.back();
    int ph = last.pool_h;
    Matrix dpool(last.filters, static_cast<Eigen::Index>(batch) * ph * ph);
    for (int b = 0; b < batch; ++b)
      for (int f = 0; f < last.filters; ++f)
        for (int p = 0; p < ph * ph; ++p) dpool(f, b * ph * ph + p) = dx(f * ph * ph + p, b);

    for (std::size_t l = geom_.conv.size(); l-- > 0;) {
      const ConvGeom& g = geom_.conv[l];
      ConvCache& cc = conv_[l];
      const int oh = g.out_h;
      ph = g.pool_h;
      Matrix dzc = Matrix::Zero(g.filters, static_cast<Eigen::Index>(batch) * oh * oh);
      for (Eigen::Index col = 0; col < dpool.cols(); ++col)
        for (int f = 0; f < g.filters; ++f) {
          const int src = cc.argmax[static_cast<std::size_t>(col) * g.filters + f];
          if (cc.z(f, src) > 0.0) dzc(f, src) += dpool(f, col);
        }
      const int rows = g.in_c * g.kernel * g.kernel;
      auto& gw = grad[2 * l];
      auto& gb = grad[2 * l + 1];
      gw.resize(static_cast<std::size_t>(g.filters) * rows);
      gb.resize(g.filters);
      const RowMajorMatrix dw = dzc * cc.col.transpose();
      std::copy(dw.data(), dw.data() + dw.size(), gw.begin());
      const Eigen::VectorXd db = dzc.rowwise().sum();
      std::copy(db.data(), db.data() + g.filters, gb.begin());
      if (l == 0) break;

      const RowMajorMatrix& wm = weights_[l];
      const Matrix dcol = wm.transpose() * dzc;
      const int k = g.kernel, s = g.stride, ih = g.in_h;
      Matrix da = Matrix::Zero(g.in_c, static_cast<Eigen::Index>(batch) * ih * ih);
      for (int b = 0; b < batch; ++b)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < oh; ++ox) {
            const double* src = dcol.col(static_cast<Eigen::Index>(b) * oh * oh + oy * oh + ox).data();
            for (int c = 0; c < g.in_c; ++c)
              for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                  da(c, static_cast<Eigen::Index>(b) * ih * ih + (oy * s + ky) * ih + ox * s + kx) += *src++;
          }
      dpool = std::move(da);
    }
    return grad;
  }

 private:
  const ModelWeights& w_;
  Geometry geom_;
  std::vector<RowMajorMatrix> weights_;
  std::vector<ConvCache> conv_;
  std::vector<FcCache> fc_;
  int batch_ = 0;
};

Matrix make_input(const ClassifierConfig& cfg, std::span<const LabImage> images) {
  const int hw = cfg.input_size * cfg.input_size;
  Matrix a0(3, static_cast<Eigen::Index>(images.size()) * hw);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].width != cfg.input_size || images[i].height != cfg.input_size)
      throw std::invalid_argument("cnn: crop is " + std::to_string(images[i].width) + "x" + std::to_string(images[i].height) +
                                  ", network expects " + std::to_string(cfg.input_size) + "x" + std::to_string(cfg.input_size));
    write_input(images[i], a0, static_cast<int>(i));
  }
  return a0;
}

void add_l1(const ModelWeights& w, double lambda, LossAndGradient& out) {
  double sum = 0.0;
  for (std::size_t l = 0; l < w.layers.size(); l += 2) {
    const auto& data = w.layers[l].data;
    auto& g = out.gradient[l];
    for (std::size_t i = 0; i < data.size(); ++i) {
      sum += std::abs(data[i]);
      g[i] += lambda * sign0(data[i]);
    }
  }
  out.l1_loss = lambda * sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Weights

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : layers) n += t.data.size();
  return n;
}

double ModelWeights::l1_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < layers.size(); l += 2)
    for (double v : layers[l].data) s += std::abs(v);
  return s;
}

void ModelWeights::validate() const {
  config.validate();
  const ModelWeights ref = zero_weights(config);
  if (layers.size() != ref.layers.size()) throw std::invalid_argument("weights: layer count does not match config");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].shape != ref.layers[i].shape || layers[i].data.size() != ref.layers[i].data.size())
      throw std::invalid_argument("weights: shape mismatch in layer " + std::to_string(i));
    for (double v : layers[i].data)
      if (!std::isfinite(v)) throw std::invalid_argument("weights: non-finite value in layer " + std::to_string(i));
  }
  if (config_hash != config.hash()) throw std::invalid_argument("weights: config hash mismatch");
}

ModelWeights zero_weights(const ClassifierConfig& config) {
  config.validate();
  const Geometry g = geometry_of(config);
  ModelWeights w;
  w.config = config;
  w.config_hash = config.hash();
  for (std::size_t l = 0; l < g.conv.size(); ++l) {
    const auto& c = g.conv[l];
    w.layers.push_back({"conv" + std::to_string(l) + ".weight", {c.filters, c.in_c, c.kernel, c.kernel},
                        std::vector<double>(static_cast<std::size_t>(c.filters) * c.in_c * c.kernel * c.kernel, 0.0)});
    w.layers.push_back({"conv" + std::to_string(l) + ".bias", {c.filters}, std::vector<double>(c.filters, 0.0)});
  }
  for (std::size_t l = 0; l < g.fc.size(); ++l) {
    const auto [in, out] = g.fc[l];
    const std::string name = l + 1 == g.fc.size() ? "out" : "fc" + std::to_string(l);
    w.layers.push_back({name + ".weight", {out, in}, std::vector<double>(static_cast<std::size_t>(out) * in, 0.0)});
    w.layers.push_back({name + ".bias", {out}, std::vector<double>(out, 0.0)});
  }
  return w;
}

ModelWeights init_weights(const ClassifierConfig& config, std::uint64_t seed) {
  ModelWeights w = zero_weights(config);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < w.layers.size(); l += 2) {
    const auto& shape = w.layers[l].shape;
    const int fan_in = std::accumulate(shape.begin() + 1, shape.end(), 1, std::multiplies<>());
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : w.layers[l].data) v = n(rng);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Inference and training

double cnn_forward(const ModelWeights& weights, const LabImage& lab) {
  return cnn_forward_batch(weights, std::span<const LabImage>(&lab, 1)).front();
}

std::vector<double> cnn_forward_batch(const ModelWeights& weights, std::span<const LabImage> batch) {
  std::vector<double> scores;
  scores.reserve(batch.size());
  constexpr std::size_t kChunk = 64;
  Network net(weights);
  for (std::size_t start = 0; start < batch.size(); start += kChunk) {
    const auto part = batch.subspan(start, std::min(kChunk, batch.size() - start));
    const Matrix prob = net.forward(make_input(weights.config, part), static_cast<int>(part.size()));
    for (Eigen::Index b = 0; b < prob.cols(); ++b) scores.push_back(prob(1, b));
  }
  return scores;
}

LossAndGradient loss_and_gradient(const ModelWeights& weights, std::span<const LabSample> batch, double l1_lambda) {
  std::vector<LabImage> images;
  std::vector<int> labels;
  for (const auto& s : batch) {
    images.push_back(s.image);
    labels.push_back(static_cast<int>(s.label));
  }
  Network net(weights);
  const Matrix prob = net.forward(make_input(weights.config, images), static_cast<int>(batch.size()));
  LossAndGradient out;
  for (std::size_t b = 0; b < batch.size(); ++b) out.data_loss -= std::log(std::max(prob(labels[b], b), 1e-300));
  out.data_loss /= static_cast<double>(batch.size());
  out.gradient = net.backward(prob, labels);
  add_l1(weights, l1_lambda, out);
  return out;
}

void sgd_step(ModelWeights& weights, const std::vector<std::vector<double>>& gradient, double learning_rate) {
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    auto& data = weights.layers[l].data;
    const auto& g = gradient[l];
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= learning_rate * g[i];
  }
}

TrainResult cnn_train(const ClassifierConfig& config, std::span<const LabSample> corpus) {
  config.validate();
  const bool has_pos = std::any_of(corpus.begin(), corpus.end(), [](const LabSample& s) { return s.label == Label::cone; });
  const bool has_neg = std::any_of(corpus.begin(), corpus.end(), [](const LabSample& s) { return s.label == Label::not_cone; });
  if (!has_pos || !has_neg) throw std::invalid_argument("cnn_train: corpus must contain both classes");

  TrainResult result;
  result.weights = init_weights(config, config.rng_seed);
  result.loss_trace.reserve(config.iterations);

  // Normalised inputs are built once; batches gather columns from here.
  std::vector<LabImage> images;
  images.reserve(corpus.size());
  for (const auto& s : corpus) images.push_back(s.image);
  const Matrix all = make_input(config, images);
  const Eigen::Index hw = static_cast<Eigen::Index>(config.input_size) * config.input_size;

  std::mt19937_64 batch_rng(config.rng_seed ^ 0x5DEECE66Dull);
  std::mt19937_64 dropout_rng(config.rng_seed ^ 0xB5297A4Dull);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), batch_rng);
  std::size_t cursor = 0;

  const int bs = config.batch_size;
  Matrix input(3, bs * hw);
  std::vector<int> labels(bs);
  for (int it = 0; it < config.iterations; ++it) {
    for (int b = 0; b < bs; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), batch_rng);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      input.middleCols(b * hw, hw) = all.middleCols(static_cast<Eigen::Index>(idx) * hw, hw);
      labels[b] = static_cast<int>(corpus[idx].label);
    }
    Network net(result.weights);
    const Matrix prob = net.forward(input, bs, &dropout_rng);
    LossAndGradient lg;
    for (int b = 0; b < bs; ++b) lg.data_loss -= std::log(std::max(prob(labels[b], b), 1e-300));
    lg.data_loss /= bs;
    lg.gradient = net.backward(prob, labels);
    add_l1(result.weights, config.l1_lambda, lg);
    result.loss_trace.push_back(lg.total());
    sgd_step(result.weights, lg.gradient, config.learning_rate);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialisation

nlohmann::json weights_to_json(const ModelWeights& w) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& t : w.layers) layers.push_back({{"name", t.name}, {"shape", t.shape}, {"data", t.data}});
  return {{"config_hash", w.config_hash}, {"config", to_json(w.config)}, {"layers", layers}};
}

ModelWeights weights_from_json(const nlohmann::json& j) {
  ModelWeights w;
  w.config = classifier_config_from_json(j.at("config"));
  w.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& l : j.at("layers"))
    w.layers.push_back({l.value("name", std::string()), l.at("shape").get<std::vector<int>>(), l.at("data").get<std::vector<double>>()});
  w.validate();
  return w;
}

void save_weights(const std::filesystem::path& path, const ModelWeights& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << weights_to_json(w).dump() << '\n';
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file " + path.string());
  return weights_from_json(nlohmann::json::parse(in));
}

double CnnClassifier::score(const LabImage& lab) const {
  ++invocations_;
  return cnn_forward(weights_, lab);
}

double CnnClassifier::score(const RgbImage& crop) const { return score(rgb_to_lab(crop)); }

}  // namespace conedet::vision
