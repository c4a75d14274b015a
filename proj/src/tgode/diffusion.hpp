#pragma once

#include <optional>
#include <vector>

#include "tgode/tensor.hpp"
#include "tgode/time_codec.hpp"

namespace tgode {

// Linear beta schedule with cumulative products. Index k runs 1..K;
// alpha_bar(0) == 1 by definition.
struct NoiseSchedule {
  int K = 0;
  std::vector<double> beta;       // beta[k-1] for step k
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // alpha_bar[k], size K+1, alpha_bar[0] = 1

  static NoiseSchedule linear(int K, double beta_start = 1e-4, double beta_end = 0.02);

  double beta_at(int k) const { return beta[k - 1]; }
  double alpha_at(int k) const { return alpha[k - 1]; }
  double alpha_bar_at(int k) const { return alpha_bar[k]; }
  // posterior variance beta_tilde_k = beta_k (1 - abar_{k-1}) / (1 - abar_k)
  double posterior_variance(int k) const;
  // ELBO weight for step k; the k=1 weight diverges analytically and is
  // clamped to 1, matching common diffusion-recommender implementations.
  double elbo_coefficient(int k) const;
};

struct GeneratorConfig {
  int vocab = 0;
  int d = 0;       // sequence-representation dimension
  int d_z = 32;    // latent dimension
  int hidden = 64;
  int K = 5;
  int c_dim = 16;     // guidance embedding width (even)
  int step_dim = 8;   // step-embedding width
  double lambda_reg = 1e-4;
  double lambda_vae = 1e-3;
};

// VAE encoder + conditioned denoiser + score decoder.
struct GeneratorParams {
  GeneratorConfig cfg;
  TimeEmbeddingCodec guidance;  // c_t, learnable

  Param enc_w1, enc_b1;          // (vocab + d) -> hidden
  Param enc_w_mean, enc_b_mean;  // hidden -> d_z
  Param enc_w_logvar, enc_b_logvar;
  Param den_w1, den_b1;  // (d_z + c_dim + step_dim) -> hidden
  Param den_w2, den_b2;  // hidden -> d_z
  Param step_table;      // (K+1) x step_dim
  Param dec_w, dec_b;    // d_z -> vocab

  GeneratorParams() = default;
  GeneratorParams(const GeneratorConfig& cfg, Rng& rng);
  std::vector<Param*> params();
};

struct LatentEncoding {
  NodeId z0;
  NodeId mean;
  NodeId logvar;
};

// z0 = mean + exp(0.5 logvar) * eps in training mode, mean otherwise.
LatentEncoding encode_latent(Tape& tape, const Tensor& a_row, const Tensor& h_s_t,
                             GeneratorParams& g, bool training, Rng* rng);

// Eq-style closed-form forward corruption to step k.
NodeId diffuse_forward(Tape& tape, NodeId z0, int k, const NoiseSchedule& sched, Rng* rng,
                       const std::optional<Tensor>& fixed_noise = std::nullopt);

// Denoiser network: predicts z0 from (z_k, c_t, k). k = 0 is the pure
// denoising inference mode.
NodeId predict_z0(Tape& tape, NodeId z_k, double t, int k, GeneratorParams& g);

struct DenoiseResult {
  NodeId mu;
  NodeId z_prev;
  double sigma2;  // fixed posterior variance
};

// One reverse step k -> k-1 with posterior mean from the predicted z0.
DenoiseResult denoise_step(Tape& tape, NodeId z_k, double t, int k, GeneratorParams& g,
                           const NoiseSchedule& sched, bool sampling, Rng* rng);

// Decoded item scores from a latent.
NodeId decode_scores(Tape& tape, NodeId z, GeneratorParams& g);

struct DiffusionExample {
  Tensor a_row;  // 1 x vocab multi-hot (weight-accumulated) history before t
  Tensor h_s;    // 1 x d sequence representation at t (constant this phase)
  double t = 0.0;
};

// Batch-mean loss: ELBO-weighted reconstruction + L1 on decoded scores +
// KL(N(mean, diag exp(logvar)) || N(0,I)).
NodeId diffusion_loss(Tape& tape, const std::vector<DiffusionExample>& batch, GeneratorParams& g,
                      const NoiseSchedule& sched, Rng& rng);

}  // namespace tgode
