#include "cinn/network.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace cinn {

ParamSet::ParamSet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": bias length does not match weight rows");
    }
    if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": input width " +
                                  std::to_string(layer.weight.cols()) + " does not match previous output " +
                                  std::to_string(layers_[l - 1].weight.rows()));
    }
  }
}

std::vector<Eigen::Index> ParamSet::dims() const {
  std::vector<Eigen::Index> out;
  if (layers_.empty()) return out;
  out.push_back(layers_.front().weight.cols());
  for (const Layer& layer : layers_) out.push_back(layer.weight.rows());
  return out;
}

Eigen::Index ParamSet::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
Eigen::Index ParamSet::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat.push_back(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat.push_back(layer.bias(r));
  }
  return flat;
}

void ParamSet::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("ParamSet::assign: expected " + std::to_string(parameter_count()) + " values, got " +
                                std::to_string(flat.size()));
  }
  std::size_t k = 0;
  for (Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = flat[k++];
  }
}

void ParamSet::append_blocks(std::vector<ParamBlock>& out) {
  for (Layer& layer : layers_) {
    out.push_back({layer.weight.data(), layer.weight.rows(), layer.weight.cols()});
    out.push_back({layer.bias.data(), layer.bias.size(), 1});
  }
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& a = layers_[l];
    const Layer& b = other.layers_[l];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

namespace {

void check_dims(std::span<const int> dims) {
  if (dims.size() < 2) throw std::invalid_argument("network needs at least an input and an output dimension");
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("network dimensions must be positive");
  }
}

}  // namespace

ParamSet glorot_init(std::span<const int> dims, std::uint64_t seed) {
  check_dims(dims);
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
    Layer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = normal(rng);
    }
    layers.push_back(std::move(layer));
  }
  return ParamSet(std::move(layers));
}

ParamSet zero_init(std::span<const int> dims) {
  check_dims(dims);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers.push_back({Eigen::MatrixXd::Zero(dims[l + 1], dims[l]), Eigen::VectorXd::Zero(dims[l + 1])});
  }
  return ParamSet(std::move(layers));
}

std::vector<int> mlp_dims(int input, int hidden_layers, int width, int output) {
  std::vector<int> dims{input};
  for (int i = 0; i < hidden_layers; ++i) dims.push_back(width);
  dims.push_back(output);
  return dims;
}

void Dataset::validate() const {
  if (inputs.cols() != targets.cols()) {
    throw std::invalid_argument("dataset has " + std::to_string(inputs.cols()) + " inputs but " +
                                std::to_string(targets.cols()) + " targets");
  }
  if (weights && weights->size() != inputs.cols()) throw std::invalid_argument("dataset weight count mismatch");
}

// ---- scalar tape ----

TapedParams bind(ad::Tape& tape, const ParamSet& params) {
  TapedParams taped;
  for (const Layer& layer : params.layers()) {
    TapedLayer t{layer.weight.cols(), layer.weight.rows(), {}, {}};
    t.weight.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) t.weight.push_back(ad::Var::leaf(tape, layer.weight(r, c)));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) t.bias.push_back(ad::Var::leaf(tape, layer.bias(r)));
    taped.layers.push_back(std::move(t));
  }
  return taped;
}

std::vector<double> gradient(const TapedParams& params, std::span<const double> adjoints) {
  std::vector<double> g;
  for (const TapedLayer& layer : params.layers) {
    for (const ad::Var& w : layer.weight) g.push_back(adjoints[w.id()]);
    for (const ad::Var& b : layer.bias) g.push_back(adjoints[b.id()]);
  }
  return g;
}

ad::Var mse_loss(std::span<const ad::Var> predictions, std::span<const double> targets, std::size_t dim) {
  if (predictions.empty()) throw std::invalid_argument("mse_loss: empty prediction set");
  if (predictions.size() != targets.size()) throw std::invalid_argument("mse_loss: predictions/targets length mismatch");
  if (dim == 0 || predictions.size() % dim != 0) throw std::invalid_argument("mse_loss: bad component count");
  ad::Var acc = square(predictions[0] - targets[0]);
  for (std::size_t i = 1; i < predictions.size(); ++i) acc = acc + square(predictions[i] - targets[i]);
  return acc * (1.0 / static_cast<double>(predictions.size() / dim));
}

// ---- batched ----

BoundParams take_bound(std::span<const ad::Mat>& nodes, std::size_t layers) {
  if (nodes.size() < 2 * layers) throw std::invalid_argument("take_bound: not enough parameter nodes");
  BoundParams bound;
  for (std::size_t l = 0; l < layers; ++l) bound.push_back({nodes[2 * l], nodes[2 * l + 1]});
  nodes = nodes.subspan(2 * layers);
  return bound;
}

BoundParams bind(ad::MatrixTape& tape, const ParamSet& params) {
  BoundParams bound;
  for (const Layer& layer : params.layers()) bound.push_back({tape.leaf(layer.weight), tape.leaf(layer.bias)});
  return bound;
}

ad::Mat forward(const BoundParams& params, ad::Mat input) {
  if (params.empty()) throw std::invalid_argument("forward: empty network");
  if (input.rows() != params.front().weight.cols()) throw std::invalid_argument("forward: input dimension mismatch");
  ad::Mat h = input;
  for (std::size_t l = 0; l < params.size(); ++l) {
    ad::Mat z = add_bias(matmul(params[l].weight, h), params[l].bias);
    h = l + 1 < params.size() ? tanh(z) : z;
  }
  return h;
}

ad::MatJet forward(const BoundParams& params, const ad::MatJet& input) {
  if (params.empty()) throw std::invalid_argument("forward: empty network");
  if (input.value.rows() != params.front().weight.cols()) throw std::invalid_argument("forward: input dimension mismatch");
  ad::MatJet h = input;
  for (std::size_t l = 0; l < params.size(); ++l) {
    ad::MatJet z{add_bias(matmul(params[l].weight, h.value), params[l].bias), matmul(params[l].weight, h.tangent)};
    h = l + 1 < params.size() ? tanh(z) : z;
  }
  return h;
}

Eigen::MatrixXd evaluate(const ParamSet& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw std::invalid_argument("evaluate: input dimension mismatch");
  Eigen::MatrixXd h = inputs;
  const auto& layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = (layers[l].weight * h).colwise() + layers[l].bias;
    h = l + 1 < layers.size() ? ad::fast_tanh(z) : z;
  }
  return h;
}

ad::Mat mse_loss(ad::Mat predictions, const Eigen::MatrixXd& targets, const std::optional<Eigen::RowVectorXd>& weights,
                 Eigen::Index count) {
  if (predictions.cols() == 0) throw std::invalid_argument("mse_loss: empty prediction set");
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw std::invalid_argument("mse_loss: predictions/targets shape mismatch");
  }
  ad::MatrixTape& tape = predictions.tape();
  ad::Mat sq = square(predictions - tape.constant(targets));
  if (weights) {
    Eigen::MatrixXd w = weights->replicate(targets.rows(), 1);
    sq = sq * tape.constant(std::move(w));
  }
  return (1.0 / static_cast<double>(count > 0 ? count : targets.cols())) * sum(sq);
}

// ---- checkpoints ----
//
// {"format": "cinn-paramset", "version": 1, "dims": [in, ..., out],
//  "layers": [{"weight": [row-major out*in], "bias": [out]}, ...]}

std::string to_checkpoint_json(const ParamSet& params) {
  nlohmann::json j;
  j["format"] = "cinn-paramset";
  j["version"] = 1;
  j["dims"] = params.dims();
  j["layers"] = nlohmann::json::array();
  for (const Layer& layer : params.layers()) {
    std::vector<double> w;
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    }
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    j["layers"].push_back({{"weight", w}, {"bias", b}});
  }
  return j.dump();
}

ParamSet from_checkpoint_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "cinn-paramset") throw std::invalid_argument("not a cinn-paramset checkpoint");
  const auto dims = j.at("dims").get<std::vector<Eigen::Index>>();
  const auto& layers_json = j.at("layers");
  if (dims.size() < 2 || layers_json.size() != dims.size() - 1) throw std::invalid_argument("checkpoint dims/layers mismatch");
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto w = layers_json[l].at("weight").get<std::vector<double>>();
    const auto b = layers_json[l].at("bias").get<std::vector<double>>();
    const Eigen::Index out = dims[l + 1];
    const Eigen::Index in = dims[l];
    if (static_cast<Eigen::Index>(w.size()) != out * in || static_cast<Eigen::Index>(b.size()) != out) {
      throw std::invalid_argument("checkpoint layer " + std::to_string(l) + " has wrong size");
    }
    Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * in + c)];
      layer.bias(r) = b[static_cast<std::size_t>(r)];
    }
    layers.push_back(std::move(layer));
  }
  return ParamSet(std::move(layers));
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << to_checkpoint_json(params) << '\n';
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_checkpoint_json(buffer.str());
}

}  // namespace cinn
