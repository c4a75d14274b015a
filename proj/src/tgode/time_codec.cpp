#include "tgode/time_codec.hpp"

#include <cmath>

#include "tgode/errors.hpp"

namespace tgode {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TimeEmbeddingCodec::TimeEmbeddingCodec(const std::string& name, int d, bool learn) {
  if (d < 2 || d % 2 != 0) throw ContractError("TimeEmbeddingCodec: dim must be even and >= 2");
  dim = d;
  learnable = learn;
  int half = d / 2;
  Tensor w(1, half), b(1, half);
  for (int i = 0; i < half; ++i) {
    // geometric frequency ladder scaled so the slowest component completes
    // one cycle over the unit interval
    w.at(0, i) = std::pow(10000.0, -2.0 * i / static_cast<double>(d));
    b.at(0, i) = 0.0;
  }
  omega = Param(name + "/omega", std::move(w));
  offset = Param(name + "/offset", std::move(b));
}

NodeId TimeEmbeddingCodec::encode(Tape& tape, double t) {
  NodeId w = learnable ? tape.leaf(omega) : tape.constant(omega.value);
  NodeId b = learnable ? tape.leaf(offset) : tape.constant(offset.value);
  NodeId phase = tape.add(tape.scale(w, kTwoPi * t), b);
  return tape.concat_cols(tape.sin_(phase), tape.cos_(phase));
}

Tensor TimeEmbeddingCodec::encode_value(double t) const {
  int half = dim / 2;
  Tensor out(1, dim);
  for (int i = 0; i < half; ++i) {
    double phase = kTwoPi * omega.value.at(0, i) * t + offset.value.at(0, i);
    out.at(0, i) = std::sin(phase);
    out.at(0, half + i) = std::cos(phase);
  }
  return out;
}

}  // namespace tgode
