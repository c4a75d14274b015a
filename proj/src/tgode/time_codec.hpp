#pragma once

#include <string>

#include "tgode/tensor.hpp"

namespace tgode {

// Sinusoidal time encoding: concat_i sin(2*pi*w_i*t + b_i) then cos(...).
// Frequencies/offsets are trainable parameters when learnable (the diffusion
// guidance embedding c_t); the encoder position embedding and the ODE
// timestamp encoding use fixed geometric frequencies.
struct TimeEmbeddingCodec {
  int dim = 0;  // even; dim/2 frequencies
  bool learnable = false;
  Param omega;   // 1 x dim/2, strictly positive
  Param offset;  // 1 x dim/2

  TimeEmbeddingCodec() = default;
  TimeEmbeddingCodec(const std::string& name, int dim, bool learnable);

  // 1 x dim output on the tape; differentiable w.r.t. omega/offset when learnable.
  NodeId encode(Tape& tape, double t);

  // Plain evaluation without a tape.
  Tensor encode_value(double t) const;
};

}  // namespace tgode
