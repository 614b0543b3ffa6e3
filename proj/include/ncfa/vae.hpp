#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ncfa/graph.hpp"
#include "ncfa/indep.hpp"

namespace ncfa::vae {

/// Gaussian encoder heads, masked single-linear decoder, and per-measurement
/// observation log-variances (the residual measurement errors).
struct VAEParams {
  Eigen::MatrixXd enc_weight;         // lambda x n, posterior mean head
  Eigen::VectorXd enc_bias;           // lambda
  Eigen::MatrixXd enc_logvar_weight;  // lambda x n
  Eigen::VectorXd enc_logvar_bias;    // lambda
  Eigen::MatrixXd dec_weight;         // n x lambda, zero outside the mask
  Eigen::VectorXd dec_bias;           // n
  Eigen::VectorXd obs_lognoise;       // n
  Eigen::MatrixXd mask;               // n x lambda 0/1, (i,z)=1 iff z parents i

  int n() const { return static_cast<int>(dec_weight.rows()); }
  int lambda() const { return static_cast<int>(dec_weight.cols()); }
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  int batch_size = 0;  // 0 = full batch when the training split is <= 2048, else 256
  double split_fraction = 0.7;
  std::uint64_t seed = 0;
};

/// Per-epoch mean negative ELBO on the training and validation splits.
struct TrainTrace {
  std::vector<double> train_loss;
  std::vector<double> val_loss;

  double final_train() const { return train_loss.back(); }
  double final_val() const { return val_loss.back(); }
};

struct Gradients {
  Eigen::MatrixXd enc_weight, enc_logvar_weight, dec_weight;
  Eigen::VectorXd enc_bias, enc_logvar_bias, dec_bias, obs_lognoise;
};

struct AdamWState {
  Gradients m, v;
  long long step = 0;
};

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(int at_epoch)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(at_epoch)),
        epoch(at_epoch) {}
  int epoch;
};

/// Masked decoder entries are exactly zero; unmasked weights are uniform on
/// (-1/sqrt(fan_in), 1/sqrt(fan_in)); biases and log-noise start at zero.
/// Draw order: enc_weight, enc_logvar_weight, dec_weight, all row-major.
VAEParams init_params(const NCFAGraph& ncfa, std::uint64_t seed);

struct EncodeResult {
  Eigen::MatrixXd mu;      // b x lambda
  Eigen::MatrixXd logvar;  // b x lambda
};

EncodeResult encode(const VAEParams& params, const Eigen::MatrixXd& batch);

/// Decoder mean z W_dec^T + bias with the mask applied multiplicatively, so
/// non-parent latents cannot influence a measurement.
Eigen::MatrixXd decode(const VAEParams& params, const Eigen::MatrixXd& z);

/// Mean negative ELBO per sample with one reparameterized latent draw
/// (noise drawn row-major over b x lambda from the seed).
double elbo_loss(const VAEParams& params, const Eigen::MatrixXd& batch,
                 std::uint64_t seed);

/// Same estimator as elbo_loss, also producing reverse-mode gradients;
/// masked decoder positions receive exactly zero gradient.
double elbo_loss_grad(const VAEParams& params, const Eigen::MatrixXd& batch,
                      std::uint64_t seed, Gradients& grads);

AdamWState make_adamw_state(const VAEParams& params);

/// Decoupled weight decay AdamW with bias-corrected moments; the decoder
/// mask is re-applied after the update.
void adamw_step(AdamWState& state, VAEParams& params, const Gradients& grads,
                const TrainConfig& config);

/// Full training loop: seeded 70/30 split, per-epoch passes, deterministic
/// given (graph, data, config).
std::pair<VAEParams, TrainTrace> train(const NCFAGraph& ncfa,
                                       const indep::SampleMatrix& sample,
                                       const TrainConfig& config);

/// Fully connected reference model: identical to train with an all-ones mask.
std::pair<VAEParams, TrainTrace> baseline_vae(int n, long long lambda,
                                              const indep::SampleMatrix& sample,
                                              const TrainConfig& config);

/// Draws z ~ N(0, I_lambda) and returns decoder means plus observation noise.
Eigen::MatrixXd sample_generative(const VAEParams& params, int count,
                                  std::uint64_t seed);

}  // namespace ncfa::vae
