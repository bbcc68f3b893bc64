#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bae/likelihood.hpp"
#include "bae/types.hpp"

namespace bae {

enum class Activation : uint8_t { LeakyRelu = 0, Sigmoid = 1, Identity = 2 };

// Paper-conformant configs keep the leaky ReLU slope at 0.01.
inline constexpr double kLeakyReluSlope = 0.01;

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation act = Activation::Identity;
  double slope = kLeakyReluSlope;
};

struct Layer {
  LayerSpec spec;
  Matrix W;  // [in_dim, out_dim]
  Vector b;  // [out_dim]
};

// Fully-connected autoencoder. The decoder head is a sigmoid so outputs live
// in (0,1); a VAE variant instead ends its encoder with an identity layer
// emitting 2*latent_dim values (mean and log-variance of the latent code).
struct AeModel {
  std::vector<Layer> encoder;
  std::vector<Layer> decoder;
  int latent_dim = 0;

  int n_layers() const { return static_cast<int>(encoder.size() + decoder.size()); }
  Layer& layer(int i);
  const Layer& layer(int i) const;
  int input_dim() const;
  int output_dim() const;
};

// Throws DimensionError when layer dims do not chain, the decoder head is not
// a sigmoid, or the encoder/latent widths disagree. `vae_head` expects the
// encoder to emit 2*latent_dim.
void validate_model(const AeModel& m, bool vae_head = false);

// One tensor per parameter tensor of the model, congruent shapes,
// encoder layers first.
struct Gradient {
  std::vector<Matrix> W;
  std::vector<Vector> b;

  static Gradient zeros_like(const AeModel& m);
  void set_zero();
};

// Flat mutable view over every parameter (or gradient) tensor, used by the
// optimizer, regularizers and finite-difference checks.
struct ParamView {
  double* data;
  Eigen::Index size;
};
std::vector<ParamView> param_views(AeModel& m);
std::vector<ParamView> grad_views(Gradient& g);

Matrix apply_activation(const Matrix& z, Activation a, double slope);

// Per-layer dropout masks; an empty matrix means no mask for that layer and a
// single-row mask is broadcast across the batch. Masks multiply activations.
using MaskList = std::vector<Matrix>;

struct ForwardCache {
  std::vector<Matrix> inputs;   // post-mask input fed to each layer
  std::vector<Matrix> preacts;  // z = x W + b
  std::vector<Matrix> acts;     // activation before clamp/mask
  Matrix output;                // final output (clamped when requested)
};

// Runs the layer stack on x. When clamp_final is set the last activation is
// clamped into [kClampLo, kClampHi] (the sigmoid-head policy).
Matrix run_layers(const std::vector<Layer>& layers, const Matrix& x,
                  ForwardCache* cache, const MaskList* masks, bool clamp_final);

// Reverse pass for a cached run_layers call. d_out is dL/d(output);
// gradients accumulate into grad_w/grad_b (sized like layers). Returns
// dL/d(input). clamp_final must match the forward call: the derivative is
// zero wherever the clamp was active.
Matrix backprop_layers(const std::vector<Layer>& layers, const ForwardCache& cache,
                       const Matrix& d_out, std::vector<Matrix>& grad_w,
                       std::vector<Vector>& grad_b, const MaskList* masks,
                       bool clamp_final);

// x: [batch, D] with values in [0,1]. Output has the same shape, every
// element strictly inside (0,1).
Matrix forward(const AeModel& m, const Matrix& x);

// Latent embedding, [batch, latent_dim] (or 2*latent_dim for a VAE head).
Matrix encode(const AeModel& m, const Matrix& x);

// Mean negative log-likelihood over the batch (each row's LL is already a
// per-pixel mean). Throws NumericError if the loss is non-finite.
double nn_loss(const AeModel& m, const Matrix& x, LikelihoodKind kind,
               const MaskList* masks = nullptr);
double nn_loss_and_grad(const AeModel& m, const Matrix& x, LikelihoodKind kind,
                        Gradient& grad, const MaskList* masks = nullptr);

// Weights ~ N(0, 1/in_dim), biases zero, deterministic per seed.
AeModel init_params(const std::vector<LayerSpec>& encoder_specs,
                    const std::vector<LayerSpec>& decoder_specs, int latent_dim,
                    uint64_t seed);

// Symmetric MLP stacks: encoder input->hidden...->latent, decoder mirrored,
// hidden layers leaky ReLU, decoder head sigmoid. A VAE head makes the final
// encoder layer identity with width 2*latent.
void make_ae_specs(int input_dim, const std::vector<int>& hidden, int latent_dim,
                   bool vae_head, std::vector<LayerSpec>& encoder_specs,
                   std::vector<LayerSpec>& decoder_specs);

// Checkpoint file: magic "BAE1", little-endian u32 layer count, then per
// layer u32 in_dim, u32 out_dim, u8 activation tag, f64 weights row-major,
// f64 biases. Layers are stored encoder first.
void save_checkpoint(const std::string& path, const AeModel& m);
std::vector<Layer> load_layers(const std::string& path);
AeModel assemble_model(std::vector<Layer> layers, int encoder_layers, int latent_dim);

}  // namespace bae
