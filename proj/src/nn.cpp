#include "bae/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace bae {

Layer& AeModel::layer(int i) {
  const int ne = static_cast<int>(encoder.size());
  return i < ne ? encoder[i] : decoder[i - ne];
}

const Layer& AeModel::layer(int i) const {
  const int ne = static_cast<int>(encoder.size());
  return i < ne ? encoder[i] : decoder[i - ne];
}

int AeModel::input_dim() const {
  return encoder.empty() ? 0 : encoder.front().spec.in_dim;
}

int AeModel::output_dim() const {
  return decoder.empty() ? 0 : decoder.back().spec.out_dim;
}

void validate_model(const AeModel& m, bool vae_head) {
  if (m.encoder.empty() || m.decoder.empty()) {
    throw DimensionError("model needs at least one encoder and one decoder layer");
  }
  if (m.latent_dim <= 0) throw DimensionError("latent_dim must be positive");

  auto check_chain = [](const std::vector<Layer>& layers, const char* part) {
    for (size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = layers[i];
      if (l.spec.in_dim <= 0 || l.spec.out_dim <= 0) {
        throw DimensionError(std::string(part) + " layer has non-positive dims");
      }
      if (l.W.rows() != l.spec.in_dim || l.W.cols() != l.spec.out_dim ||
          l.b.size() != l.spec.out_dim) {
        throw DimensionError(std::string(part) + " layer parameter shapes disagree with spec");
      }
      if (i > 0 && layers[i - 1].spec.out_dim != l.spec.in_dim) {
        throw DimensionError(std::string(part) + " layer dims do not chain");
      }
    }
  };
  check_chain(m.encoder, "encoder");
  check_chain(m.decoder, "decoder");

  const int enc_out = m.encoder.back().spec.out_dim;
  const int expected = vae_head ? 2 * m.latent_dim : m.latent_dim;
  if (enc_out != expected) {
    throw DimensionError("encoder output dim " + std::to_string(enc_out) +
                         " != expected " + std::to_string(expected));
  }
  if (m.decoder.front().spec.in_dim != m.latent_dim) {
    throw DimensionError("decoder input dim != latent_dim");
  }
  if (m.decoder.back().spec.act != Activation::Sigmoid) {
    throw DimensionError("decoder head must be a sigmoid");
  }
}

Gradient Gradient::zeros_like(const AeModel& m) {
  Gradient g;
  const int n = m.n_layers();
  g.W.reserve(n);
  g.b.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Layer& l = m.layer(i);
    g.W.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
    g.b.push_back(Vector::Zero(l.b.size()));
  }
  return g;
}

void Gradient::set_zero() {
  for (auto& w : W) w.setZero();
  for (auto& v : b) v.setZero();
}

std::vector<ParamView> param_views(AeModel& m) {
  std::vector<ParamView> views;
  for (int i = 0; i < m.n_layers(); ++i) {
    Layer& l = m.layer(i);
    views.push_back({l.W.data(), l.W.size()});
    views.push_back({l.b.data(), l.b.size()});
  }
  return views;
}

std::vector<ParamView> grad_views(Gradient& g) {
  std::vector<ParamView> views;
  for (size_t i = 0; i < g.W.size(); ++i) {
    views.push_back({g.W[i].data(), g.W[i].size()});
    views.push_back({g.b[i].data(), g.b[i].size()});
  }
  return views;
}

Matrix apply_activation(const Matrix& z, Activation a, double slope) {
  switch (a) {
    case Activation::LeakyRelu:
      return (z.array() > 0.0).select(z, slope * z);
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::Identity:
      return z;
  }
  throw ConfigError("bad activation");
}

namespace {

Matrix activation_grad(const Matrix& z, const Matrix& act, Activation a, double slope) {
  switch (a) {
    case Activation::LeakyRelu:
      return (z.array() > 0.0).select(Matrix::Ones(z.rows(), z.cols()),
                                      Matrix::Constant(z.rows(), z.cols(), slope));
    case Activation::Sigmoid:
      return (act.array() * (1.0 - act.array())).matrix();
    case Activation::Identity:
      return Matrix::Ones(z.rows(), z.cols());
  }
  throw ConfigError("bad activation");
}

void apply_mask(Matrix& a, const Matrix& mask) {
  if (mask.size() == 0) return;
  if (mask.rows() == a.rows() && mask.cols() == a.cols()) {
    a.array() *= mask.array();
  } else if (mask.rows() == 1 && mask.cols() == a.cols()) {
    a.array().rowwise() *= mask.row(0).array();
  } else {
    throw DimensionError("dropout mask shape mismatch");
  }
}

const Matrix* mask_for(const MaskList* masks, size_t i) {
  if (masks == nullptr || i >= masks->size() || (*masks)[i].size() == 0) return nullptr;
  return &(*masks)[i];
}

}  // namespace

Matrix run_layers(const std::vector<Layer>& layers, const Matrix& x,
                  ForwardCache* cache, const MaskList* masks, bool clamp_final) {
  if (layers.empty()) throw DimensionError("empty layer stack");
  if (x.cols() != layers.front().spec.in_dim) {
    throw DimensionError("input has " + std::to_string(x.cols()) +
                         " columns, layer expects " +
                         std::to_string(layers.front().spec.in_dim));
  }
  if (cache) {
    cache->inputs.clear();
    cache->preacts.clear();
    cache->acts.clear();
  }
  Matrix cur = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (cache) cache->inputs.push_back(cur);
    Matrix z = cur * l.W;
    z.rowwise() += l.b.transpose();
    Matrix a = apply_activation(z, l.spec.act, l.spec.slope);
    if (cache) {
      cache->preacts.push_back(z);
      cache->acts.push_back(a);
    }
    if (i + 1 < layers.size()) {
      if (const Matrix* m = mask_for(masks, i)) apply_mask(a, *m);
    }
    cur = std::move(a);
  }
  if (clamp_final) cur = cur.array().min(kClampHi).max(kClampLo);
  if (cache) cache->output = cur;
  return cur;
}

Matrix backprop_layers(const std::vector<Layer>& layers, const ForwardCache& cache,
                       const Matrix& d_out, std::vector<Matrix>& grad_w,
                       std::vector<Vector>& grad_b, const MaskList* masks,
                       bool clamp_final) {
  const int n = static_cast<int>(layers.size());
  Matrix d_act = d_out;
  if (clamp_final) {
    const Matrix& a = cache.acts.back();
    d_act = (a.array() > kClampLo && a.array() < kClampHi)
                .select(d_act, Matrix::Zero(a.rows(), a.cols()));
  }
  for (int i = n - 1; i >= 0; --i) {
    const Layer& l = layers[i];
    Matrix dz = d_act.array() *
                activation_grad(cache.preacts[i], cache.acts[i], l.spec.act, l.spec.slope).array();
    grad_w[i] += cache.inputs[i].transpose() * dz;
    grad_b[i] += dz.colwise().sum().transpose();
    d_act = dz * l.W.transpose();
    if (i > 0) {
      if (const Matrix* m = mask_for(masks, static_cast<size_t>(i) - 1)) {
        apply_mask(d_act, *m);
      }
    }
  }
  return d_act;
}

Matrix forward(const AeModel& m, const Matrix& x) {
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) {
    throw DimensionError("input pixels must lie in [0,1]");
  }
  Matrix h = run_layers(m.encoder, x, nullptr, nullptr, false);
  return run_layers(m.decoder, h, nullptr, nullptr, true);
}

Matrix encode(const AeModel& m, const Matrix& x) {
  return run_layers(m.encoder, x, nullptr, nullptr, false);
}

namespace {

std::vector<Layer> concat_layers(const AeModel& m) {
  std::vector<Layer> all;
  all.reserve(m.n_layers());
  for (int i = 0; i < m.n_layers(); ++i) all.push_back(m.layer(i));
  return all;
}

}  // namespace

double nn_loss(const AeModel& m, const Matrix& x, LikelihoodKind kind,
               const MaskList* masks) {
  const std::vector<Layer> all = concat_layers(m);
  Matrix xhat = run_layers(all, x, nullptr, masks, true);
  const double loss = -log_likelihood_rows(kind, x, xhat).mean();
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
  return loss;
}

double nn_loss_and_grad(const AeModel& m, const Matrix& x, LikelihoodKind kind,
                        Gradient& grad, const MaskList* masks) {
  const std::vector<Layer> all = concat_layers(m);
  ForwardCache cache;
  Matrix xhat = run_layers(all, x, &cache, masks, true);
  const double batch = static_cast<double>(x.rows());
  const double loss = -log_likelihood_rows(kind, x, xhat).mean();
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");

  Matrix d_xhat = -log_likelihood_grad(kind, x, xhat) / batch;
  backprop_layers(all, cache, d_xhat, grad.W, grad.b, masks, true);
  return loss;
}

AeModel init_params(const std::vector<LayerSpec>& encoder_specs,
                    const std::vector<LayerSpec>& decoder_specs, int latent_dim,
                    uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, 0x1217);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto build = [&](const std::vector<LayerSpec>& specs) {
    std::vector<Layer> layers;
    layers.reserve(specs.size());
    for (const LayerSpec& s : specs) {
      Layer l;
      l.spec = s;
      l.W.resize(s.in_dim, s.out_dim);
      const double stddev = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
      for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = stddev * unit(rng);
      }
      l.b = Vector::Zero(s.out_dim);
      layers.push_back(std::move(l));
    }
    return layers;
  };
  AeModel m;
  m.encoder = build(encoder_specs);
  m.decoder = build(decoder_specs);
  m.latent_dim = latent_dim;
  return m;
}

void make_ae_specs(int input_dim, const std::vector<int>& hidden, int latent_dim,
                   bool vae_head, std::vector<LayerSpec>& encoder_specs,
                   std::vector<LayerSpec>& decoder_specs) {
  if (input_dim <= 0 || latent_dim <= 0) throw ConfigError("dims must be positive");
  encoder_specs.clear();
  decoder_specs.clear();
  int prev = input_dim;
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden width must be positive");
    encoder_specs.push_back({prev, h, Activation::LeakyRelu, kLeakyReluSlope});
    prev = h;
  }
  if (vae_head) {
    encoder_specs.push_back({prev, 2 * latent_dim, Activation::Identity, kLeakyReluSlope});
  } else {
    encoder_specs.push_back({prev, latent_dim, Activation::LeakyRelu, kLeakyReluSlope});
  }
  prev = latent_dim;
  for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) {
    decoder_specs.push_back({prev, *it, Activation::LeakyRelu, kLeakyReluSlope});
    prev = *it;
  }
  decoder_specs.push_back({prev, input_dim, Activation::Sigmoid, kLeakyReluSlope});
}

namespace {

void put_u32_le(std::ostream& os, uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(buf), 4);
}

uint32_t get_u32_le(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw IoError("truncated checkpoint");
  return static_cast<uint32_t>(buf[0]) | (static_cast<uint32_t>(buf[1]) << 8) |
         (static_cast<uint32_t>(buf[2]) << 16) | (static_cast<uint32_t>(buf[3]) << 24);
}

void put_f64_le(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

double get_f64_le(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw IoError("truncated checkpoint");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

constexpr char kMagic[4] = {'B', 'A', 'E', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const AeModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put_u32_le(os, static_cast<uint32_t>(m.n_layers()));
  for (int i = 0; i < m.n_layers(); ++i) {
    const Layer& l = m.layer(i);
    put_u32_le(os, static_cast<uint32_t>(l.spec.in_dim));
    put_u32_le(os, static_cast<uint32_t>(l.spec.out_dim));
    const unsigned char tag = static_cast<unsigned char>(l.spec.act);
    os.write(reinterpret_cast<const char*>(&tag), 1);
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) put_f64_le(os, l.W(r, c));
    }
    for (Eigen::Index j = 0; j < l.b.size(); ++j) put_f64_le(os, l.b[j]);
  }
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

std::vector<Layer> load_layers(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("bad checkpoint magic in " + path);
  }
  const uint32_t count = get_u32_le(is);
  std::vector<Layer> layers;
  layers.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Layer l;
    l.spec.in_dim = static_cast<int>(get_u32_le(is));
    l.spec.out_dim = static_cast<int>(get_u32_le(is));
    unsigned char tag;
    is.read(reinterpret_cast<char*>(&tag), 1);
    if (!is || tag > 2) throw IoError("bad activation tag in " + path);
    l.spec.act = static_cast<Activation>(tag);
    l.spec.slope = kLeakyReluSlope;
    if (l.spec.in_dim <= 0 || l.spec.out_dim <= 0) {
      throw IoError("bad layer dims in " + path);
    }
    l.W.resize(l.spec.in_dim, l.spec.out_dim);
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = get_f64_le(is);
    }
    l.b.resize(l.spec.out_dim);
    for (Eigen::Index j = 0; j < l.b.size(); ++j) l.b[j] = get_f64_le(is);
    layers.push_back(std::move(l));
  }
  return layers;
}

AeModel assemble_model(std::vector<Layer> layers, int encoder_layers, int latent_dim) {
  if (encoder_layers <= 0 || encoder_layers >= static_cast<int>(layers.size())) {
    throw DimensionError("encoder layer count out of range");
  }
  AeModel m;
  m.latent_dim = latent_dim;
  m.encoder.assign(std::make_move_iterator(layers.begin()),
                   std::make_move_iterator(layers.begin() + encoder_layers));
  m.decoder.assign(std::make_move_iterator(layers.begin() + encoder_layers),
                   std::make_move_iterator(layers.end()));
  return m;
}

}  // namespace bae
