#include "tgode/diffusion.hpp"

#include <cmath>

#include "tgode/errors.hpp"

namespace tgode {

NoiseSchedule NoiseSchedule::linear(int K, double beta_start, double beta_end) {
  if (K < 1) throw ContractError("NoiseSchedule: K must be >= 1");
  NoiseSchedule s;
  s.K = K;
  s.alpha_bar.push_back(1.0);
  double prod = 1.0;
  for (int k = 1; k <= K; ++k) {
    double b = K == 1 ? beta_start : beta_start + (beta_end - beta_start) * (k - 1) / (K - 1);
    s.beta.push_back(b);
    s.alpha.push_back(1.0 - b);
    prod *= 1.0 - b;
    s.alpha_bar.push_back(prod);
  }
  return s;
}

double NoiseSchedule::posterior_variance(int k) const {
  return beta_at(k) * (1.0 - alpha_bar_at(k - 1)) / (1.0 - alpha_bar_at(k));
}

double NoiseSchedule::elbo_coefficient(int k) const {
  if (k == 1) return 1.0;
  double a = alpha_bar_at(k - 1), b = alpha_bar_at(k);
  return 0.5 * (a / (1.0 - a) - b / (1.0 - b));
}

namespace {

Tensor gaussian_row(int n, Rng& rng) {
  Tensor t(1, n);
  for (auto& e : t.v) e = rng.normal();
  return t;
}

// affine layer helper: x (1 x in) * W (in x out) + b (1 x out)
NodeId affine(Tape& tape, NodeId x, Param& w, Param& b) {
  return tape.add(tape.matmul(x, tape.leaf(w)), tape.leaf(b));
}

}  // namespace

GeneratorParams::GeneratorParams(const GeneratorConfig& c, Rng& rng)
    : cfg(c), guidance("codec/guidance", c.c_dim, true) {
  auto make = [&](const char* name, int r, int col, double stddev) {
    Param p(std::string("diffusion/") + name, Tensor(r, col));
    if (stddev > 0.0) init_gaussian(p, rng, stddev);
    return p;
  };
  int in = c.vocab + c.d;
  enc_w1 = make("enc_w1", in, c.hidden, 1.0 / std::sqrt(static_cast<double>(in)));
  enc_b1 = make("enc_b1", 1, c.hidden, 0.0);
  enc_w_mean = make("enc_w_mean", c.hidden, c.d_z, 1.0 / std::sqrt(static_cast<double>(c.hidden)));
  enc_b_mean = make("enc_b_mean", 1, c.d_z, 0.0);
  enc_w_logvar = make("enc_w_logvar", c.hidden, c.d_z, 0.01);
  enc_b_logvar = make("enc_b_logvar", 1, c.d_z, 0.0);
  int din = c.d_z + c.c_dim + c.step_dim;
  den_w1 = make("den_w1", din, c.hidden, 1.0 / std::sqrt(static_cast<double>(din)));
  den_b1 = make("den_b1", 1, c.hidden, 0.0);
  den_w2 = make("den_w2", c.hidden, c.d_z, 1.0 / std::sqrt(static_cast<double>(c.hidden)));
  den_b2 = make("den_b2", 1, c.d_z, 0.0);
  step_table = make("step_table", c.K + 1, c.step_dim, 0.1);
  dec_w = make("dec_w", c.d_z, c.vocab, 1.0 / std::sqrt(static_cast<double>(c.d_z)));
  dec_b = make("dec_b", 1, c.vocab, 0.0);
}

std::vector<Param*> GeneratorParams::params() {
  std::vector<Param*> ps = {&enc_w1,     &enc_b1, &enc_w_mean, &enc_b_mean, &enc_w_logvar,
                            &enc_b_logvar, &den_w1, &den_b1,     &den_w2,     &den_b2,
                            &step_table,   &dec_w,  &dec_b};
  ps.push_back(&guidance.omega);
  ps.push_back(&guidance.offset);
  return ps;
}

LatentEncoding encode_latent(Tape& tape, const Tensor& a_row, const Tensor& h_s_t,
                             GeneratorParams& g, bool training, Rng* rng) {
  if (a_row.cols != g.cfg.vocab || a_row.rows != 1)
    throw ContractError("encode_latent: a_row must be 1 x vocab");
  if (h_s_t.cols != g.cfg.d || h_s_t.rows != 1)
    throw ContractError("encode_latent: h_s_t must be 1 x d");
  NodeId in = tape.concat_cols(tape.constant(a_row), tape.constant(h_s_t));
  NodeId h = tape.tanh_(affine(tape, in, g.enc_w1, g.enc_b1));
  LatentEncoding out;
  out.mean = affine(tape, h, g.enc_w_mean, g.enc_b_mean);
  out.logvar = affine(tape, h, g.enc_w_logvar, g.enc_b_logvar);
  if (training) {
    if (!rng) throw ContractError("encode_latent: training mode needs an rng");
    NodeId eps = tape.constant(gaussian_row(g.cfg.d_z, *rng));
    NodeId std_dev = tape.exp_(tape.scale(out.logvar, 0.5));
    out.z0 = tape.add(out.mean, tape.mul(std_dev, eps));
  } else {
    out.z0 = out.mean;
  }
  return out;
}

NodeId diffuse_forward(Tape& tape, NodeId z0, int k, const NoiseSchedule& sched, Rng* rng,
                       const std::optional<Tensor>& fixed_noise) {
  if (k < 1 || k > sched.K) throw ContractError("diffuse_forward: k out of range");
  double ab = sched.alpha_bar_at(k);
  Tensor eps;
  if (fixed_noise) {
    eps = *fixed_noise;
  } else {
    if (!rng) throw ContractError("diffuse_forward: need rng or fixed noise");
    eps = gaussian_row(tape.value(z0).cols, *rng);
  }
  NodeId noise = tape.scale(tape.constant(std::move(eps)), std::sqrt(1.0 - ab));
  return tape.add(tape.scale(z0, std::sqrt(ab)), noise);
}

NodeId predict_z0(Tape& tape, NodeId z_k, double t, int k, GeneratorParams& g) {
  if (k < 0 || k > g.cfg.K) throw ContractError("predict_z0: step out of range");
  NodeId c_t = g.guidance.encode(tape, t);
  NodeId step_emb = tape.gather_rows(tape.leaf(g.step_table), {k});
  NodeId in = tape.concat_cols(tape.concat_cols(z_k, c_t), step_emb);
  NodeId h = tape.tanh_(affine(tape, in, g.den_w1, g.den_b1));
  return affine(tape, h, g.den_w2, g.den_b2);
}

DenoiseResult denoise_step(Tape& tape, NodeId z_k, double t, int k, GeneratorParams& g,
                           const NoiseSchedule& sched, bool sampling, Rng* rng) {
  if (k < 1 || k > sched.K) throw ContractError("denoise_step: k out of range");
  NodeId z0_hat = predict_z0(tape, z_k, t, k, g);
  double ab_prev = sched.alpha_bar_at(k - 1);
  double ab = sched.alpha_bar_at(k);
  double coef_z0 = std::sqrt(ab_prev) * sched.beta_at(k) / (1.0 - ab);
  double coef_zk = std::sqrt(sched.alpha_at(k)) * (1.0 - ab_prev) / (1.0 - ab);
  DenoiseResult out;
  out.mu = tape.add(tape.scale(z0_hat, coef_z0), tape.scale(z_k, coef_zk));
  out.sigma2 = sched.posterior_variance(k);
  if (sampling) {
    if (!rng) throw ContractError("denoise_step: sampling needs an rng");
    NodeId eps = tape.constant(gaussian_row(tape.value(z_k).cols, *rng));
    out.z_prev = tape.add(out.mu, tape.scale(eps, std::sqrt(out.sigma2)));
  } else {
    out.z_prev = out.mu;
  }
  return out;
}

NodeId decode_scores(Tape& tape, NodeId z, GeneratorParams& g) {
  return affine(tape, z, g.dec_w, g.dec_b);
}

NodeId diffusion_loss(Tape& tape, const std::vector<DiffusionExample>& batch, GeneratorParams& g,
                      const NoiseSchedule& sched, Rng& rng) {
  if (batch.empty()) throw ContractError("diffusion_loss: empty batch");
  NodeId total = tape.constant(Tensor(1, 1));
  for (const auto& ex : batch) {
    int k = static_cast<int>(rng.uniform_int(1, sched.K));
    LatentEncoding enc = encode_latent(tape, ex.a_row, ex.h_s, g, true, &rng);
    NodeId z_k = diffuse_forward(tape, enc.z0, k, sched, &rng);
    NodeId z0_hat = predict_z0(tape, z_k, ex.t, k, g);
    NodeId recon = tape.scale(tape.squared_error(z0_hat, enc.z0), sched.elbo_coefficient(k));

    // edge-weight smoothness regularizer on the decoded scores
    NodeId scores = decode_scores(tape, z0_hat, g);
    NodeId l1 = tape.scale(tape.sum(tape.abs_(scores)), g.cfg.lambda_reg);

    // KL(N(mean, diag exp(logvar)) || N(0, I))
    NodeId var = tape.exp_(enc.logvar);
    NodeId mean_sq = tape.mul(enc.mean, enc.mean);
    NodeId kl_terms = tape.sub(tape.add(var, mean_sq), enc.logvar);
    NodeId kl = tape.scale(tape.add(tape.sum(kl_terms),
                                    tape.constant(Tensor::full(1, 1, -static_cast<double>(g.cfg.d_z)))),
                           0.5 * g.cfg.lambda_vae);

    total = tape.add(total, tape.add(recon, tape.add(l1, kl)));
  }
  NodeId loss = tape.scale(total, 1.0 / static_cast<double>(batch.size()));
  if (!tape.value(loss).finite()) throw NumericError("diffusion_loss: non-finite loss");
  return loss;
}

}  // namespace tgode
