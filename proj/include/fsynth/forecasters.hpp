#pragma once

// Class-conditional direct multi-step forecasters trained from scratch with
// mini-batch Adam on the Huber loss.
//
// Every architecture maps a mean-centred context of length L to H outputs; the
// context mean is added back afterwards. Parameters live in one flat vector so
// checkpoints, optimiser state and gradient checks are architecture-agnostic.
//
//   LinearDMS  y = W x + b
//   MLP        y = W2 relu(W1 x + b1) + b2
//   ElmanRNN   h_t = tanh(wx x_t + Wh h_{t-1} + bh),  y = Wo h_L + bo
//   TCNLite    two causal conv layers (kernel 3, dilation 1 then 2, ReLU),
//              affine readout of the flattened feature map

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsynth/common.hpp"
#include "fsynth/signal.hpp"
#include "fsynth/windowing.hpp"

namespace fsynth {

enum class Architecture { LinearDms, Mlp, ElmanRnn, TcnLite };

inline const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::LinearDms: return "LinearDMS";
    case Architecture::Mlp: return "MLP";
    case Architecture::ElmanRnn: return "ElmanRNN";
    case Architecture::TcnLite: return "TCNLite";
  }
  return "?";
}

inline Architecture parse_architecture(std::string_view name) {
  if (name == "LinearDMS") return Architecture::LinearDms;
  if (name == "MLP") return Architecture::Mlp;
  if (name == "ElmanRNN") return Architecture::ElmanRnn;
  if (name == "TCNLite") return Architecture::TcnLite;
  throw Error(ErrorKind::Parse, "unknown forecaster architecture '" + std::string(name) + "'");
}

inline std::size_t default_hidden_width(Architecture a) {
  switch (a) {
    case Architecture::LinearDms: return 0;
    case Architecture::Mlp: return 256;
    case Architecture::ElmanRnn: return 64;
    case Architecture::TcnLite: return 8;
  }
  return 0;
}

struct ForecasterSpec {
  Architecture architecture = Architecture::LinearDms;
  std::size_t hidden_width = 0;  // MLP units, RNN state size or TCN channels
  std::size_t context_len = 100;
  std::size_t horizon = 500;

  void validate() const {
    require(context_len >= 1 && horizon >= 1, "forecaster: L and H must be >= 1");
    require(architecture == Architecture::LinearDms || hidden_width >= 1,
            std::string("forecaster: ") + to_string(architecture) + " needs hidden_width >= 1");
  }

  friend bool operator==(const ForecasterSpec&, const ForecasterSpec&) = default;
};

inline ForecasterSpec make_spec(Architecture a, std::size_t context_len, std::size_t horizon,
                                std::size_t hidden_width = 0) {
  return {a, hidden_width ? hidden_width : default_hidden_width(a), context_len, horizon};
}

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_steps = 1000;
  double learning_rate = 1e-3;
  double huber_delta = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(batch_size >= 1, "train: batch_size must be >= 1");
    require(max_steps >= 1, "train: max_steps must be >= 1");
    require(learning_rate > 0.0, "train: learning_rate must be > 0");
    require(huber_delta > 0.0, "train: huber_delta must be > 0");
  }
};

inline double huber_loss(std::span<const double> pred, std::span<const double> target,
                         double delta) {
  require(pred.size() == target.size() && !pred.empty(), "huber_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    const double a = std::abs(r);
    acc += a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
  }
  return acc / static_cast<double>(pred.size());
}

// d huber_loss / d pred, scaled by `scale` and accumulated into `out`.
inline void huber_gradient_into(std::span<const double> pred, std::span<const double> target,
                                double delta, double scale, std::span<double> out) {
  require(pred.size() == target.size() && pred.size() == out.size(),
          "huber_gradient: length mismatch");
  const double inv_n = scale / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    const double g = std::abs(r) <= delta ? r : (r > 0 ? delta : -delta);
    out[i] += g * inv_n;
  }
}

inline std::vector<double> huber_gradient(std::span<const double> pred,
                                          std::span<const double> target, double delta) {
  require(pred.size() == target.size() && !pred.empty(), "huber_gradient: length mismatch");
  std::vector<double> g(pred.size(), 0.0);
  huber_gradient_into(pred, target, delta, 1.0, g);
  return g;
}

// Forward activations of one batch, kept for the backward pass. Rows are
// samples: input is B x L, hidden/hidden2 hold per-sample blocks.
struct Tape {
  std::size_t batch = 0;
  std::vector<double> input;
  std::vector<double> hidden;
  std::vector<double> hidden2;
};

// Stateless description of one architecture's parameter layout and maths.
// Inputs and outputs are row-major batches (B x L in, B x H out).
class ForecastNet {
 public:
  explicit ForecastNet(ForecasterSpec spec) : spec_(spec) { spec_.validate(); }

  const ForecasterSpec& spec() const noexcept { return spec_; }

  std::size_t parameter_count() const noexcept {
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    switch (spec_.architecture) {
      case Architecture::LinearDms: return H * L + H;
      case Architecture::Mlp: return W * L + W + H * W + H;
      case Architecture::ElmanRnn: return W + W * W + W + H * W + H;
      case Architecture::TcnLite: return W * 3 + W + W * W * 3 + W + H * W * L + H;
    }
    return 0;
  }

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  void init(std::span<double> p, Rng& rng) const {
    require(p.size() == parameter_count(), "ForecastNet::init: wrong parameter count");
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    std::size_t at = 0;
    auto weights = [&](std::size_t count, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < count; ++i) p[at++] = rng.uniform(-bound, bound);
    };
    auto biases = [&](std::size_t count) {
      for (std::size_t i = 0; i < count; ++i) p[at++] = 0.0;
    };
    switch (spec_.architecture) {
      case Architecture::LinearDms:
        weights(H * L, L);
        biases(H);
        break;
      case Architecture::Mlp:
        weights(W * L, L);
        biases(W);
        weights(H * W, W);
        biases(H);
        break;
      case Architecture::ElmanRnn:
        weights(W, 1);
        weights(W * W, W);
        biases(W);
        weights(H * W, W);
        biases(H);
        break;
      case Architecture::TcnLite:
        weights(W * 3, 3);
        biases(W);
        weights(W * W * 3, W * 3);
        biases(W);
        weights(H * W * L, W * L);
        biases(H);
        break;
    }
  }

  // Raw network on already-centred inputs.
  void forward(std::span<const double> p, std::span<const double> x, std::span<double> y,
               std::size_t batch, Tape& tape) const {
    require(x.size() == batch * spec_.context_len && y.size() == batch * spec_.horizon,
            "ForecastNet::forward: batch shape mismatch");
    tape.batch = batch;
    tape.input.assign(x.begin(), x.end());
    switch (spec_.architecture) {
      case Architecture::LinearDms: return forward_linear(p, y, tape);
      case Architecture::Mlp: return forward_mlp(p, y, tape);
      case Architecture::ElmanRnn: return forward_rnn(p, y, tape);
      case Architecture::TcnLite: return forward_tcn(p, y, tape);
    }
  }

  // Accumulates d loss / d params given d loss / d output (B x H).
  void backward(std::span<const double> p, const Tape& tape, std::span<const double> dy,
                std::span<double> grad) const {
    require(dy.size() == tape.batch * spec_.horizon && grad.size() == parameter_count(),
            "ForecastNet::backward: shape mismatch");
    switch (spec_.architecture) {
      case Architecture::LinearDms: return backward_linear(tape, dy, grad);
      case Architecture::Mlp: return backward_mlp(p, tape, dy, grad);
      case Architecture::ElmanRnn: return backward_rnn(p, tape, dy, grad);
      case Architecture::TcnLite: return backward_tcn(p, tape, dy, grad);
    }
  }

 private:
  // Y[b, j] = bias[j] + W[j, :] . X[b, :]; W row-major (out x in). The row
  // loop is outermost so each weight row is reused across the batch.
  static void affine(const double* W, const double* bias, const double* X, double* Y,
                     std::size_t batch, std::size_t out, std::size_t in) {
    for (std::size_t j = 0; j < out; ++j) {
      const double* row = W + j * in;
      for (std::size_t b = 0; b < batch; ++b) Y[b * out + j] = bias[j] + dot(row, X + b * in, in);
    }
  }

  // gW += dY^T X, gb += colsum(dY), and dX = dY W when dX is non-null.
  static void affine_backward(const double* W, const double* X, const double* dY, double* gW,
                              double* gb, double* dX, std::size_t batch, std::size_t out,
                              std::size_t in) {
    if (dX) std::fill(dX, dX + batch * in, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double* grow = gW + j * in;
      const double* row = W ? W + j * in : nullptr;
      for (std::size_t b = 0; b < batch; ++b) {
        const double d = dY[b * out + j];
        gb[j] += d;
        const double* x = X + b * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * x[i];
        if (dX) {
          double* dx = dX + b * in;
          for (std::size_t i = 0; i < in; ++i) dx[i] += row[i] * d;
        }
      }
    }
  }

  void forward_linear(std::span<const double> p, std::span<double> y, const Tape& tape) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon;
    affine(p.data(), p.data() + H * L, tape.input.data(), y.data(), tape.batch, H, L);
  }

  void backward_linear(const Tape& tape, std::span<const double> dy,
                       std::span<double> grad) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon;
    affine_backward(nullptr, tape.input.data(), dy.data(), grad.data(), grad.data() + H * L,
                    nullptr, tape.batch, H, L);
  }

  void forward_mlp(std::span<const double> p, std::span<double> y, Tape& tape) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* W1 = p.data();
    const double* b1 = W1 + W * L;
    const double* W2 = b1 + W;
    const double* b2 = W2 + H * W;
    tape.hidden.resize(B * W);
    affine(W1, b1, tape.input.data(), tape.hidden.data(), B, W, L);
    for (double& h : tape.hidden) h = h > 0.0 ? h : 0.0;
    affine(W2, b2, tape.hidden.data(), y.data(), B, H, W);
  }

  void backward_mlp(std::span<const double> p, const Tape& tape, std::span<const double> dy,
                    std::span<double> grad) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* W2 = p.data() + W * L + W;
    double* gW1 = grad.data();
    double* gb1 = gW1 + W * L;
    double* gW2 = gb1 + W;
    double* gb2 = gW2 + H * W;
    std::vector<double> dh(B * W);
    affine_backward(W2, tape.hidden.data(), dy.data(), gW2, gb2, dh.data(), B, H, W);
    for (std::size_t k = 0; k < B * W; ++k)
      if (tape.hidden[k] <= 0.0) dh[k] = 0.0;
    affine_backward(nullptr, tape.input.data(), dh.data(), gW1, gb1, nullptr, B, W, L);
  }

  void forward_rnn(std::span<const double> p, std::span<double> y, Tape& tape) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* wx = p.data();
    const double* Wh = wx + W;
    const double* bh = Wh + W * W;
    const double* Wo = bh + W;
    const double* bo = Wo + H * W;
    // Per sample, states h_1..h_L; row t holds h_{t+1}.
    tape.hidden.assign(B * L * W, 0.0);
    tape.hidden2.resize(B * W);
    const std::vector<double> zero(W, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      const double* x = tape.input.data() + b * L;
      double* states = tape.hidden.data() + b * L * W;
      for (std::size_t t = 0; t < L; ++t) {
        const double* prev = t == 0 ? zero.data() : states + (t - 1) * W;
        double* h = states + t * W;
        affine(Wh, bh, prev, h, 1, W, W);
        for (std::size_t k = 0; k < W; ++k) h[k] = std::tanh(h[k] + wx[k] * x[t]);
      }
      std::copy_n(states + (L - 1) * W, W, tape.hidden2.data() + b * W);
    }
    affine(Wo, bo, tape.hidden2.data(), y.data(), B, H, W);
  }

  void backward_rnn(std::span<const double> p, const Tape& tape, std::span<const double> dy,
                    std::span<double> grad) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, W = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* Wh = p.data() + W;
    const double* Wo = Wh + W * W + W;
    double* gwx = grad.data();
    double* gWh = gwx + W;
    double* gbh = gWh + W * W;
    double* gWo = gbh + W;
    double* gbo = gWo + H * W;
    std::vector<double> dlast(B * W), dh(W), da(W);
    const std::vector<double> zero(W, 0.0);
    affine_backward(Wo, tape.hidden2.data(), dy.data(), gWo, gbo, dlast.data(), B, H, W);
    for (std::size_t b = 0; b < B; ++b) {
      const double* x = tape.input.data() + b * L;
      const double* states = tape.hidden.data() + b * L * W;
      std::copy_n(dlast.data() + b * W, W, dh.data());
      for (std::size_t t = L; t-- > 0;) {
        const double* h = states + t * W;
        const double* prev = t == 0 ? zero.data() : states + (t - 1) * W;
        for (std::size_t k = 0; k < W; ++k) {
          da[k] = dh[k] * (1.0 - h[k] * h[k]);
          gwx[k] += da[k] * x[t];
        }
        affine_backward(Wh, prev, da.data(), gWh, gbh, dh.data(), 1, W, W);
      }
    }
  }

  // Causal dilated convolution over C_in x L feature maps into C_out x L.
  static void causal_conv(const double* k, const double* b, const double* in, double* out,
                          std::size_t c_in, std::size_t c_out, std::size_t L,
                          std::size_t dilation) {
    for (std::size_t co = 0; co < c_out; ++co) {
      double* o = out + co * L;
      for (std::size_t t = 0; t < L; ++t) o[t] = b[co];
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const double* src = in + ci * L;
        for (std::size_t j = 0; j < 3; ++j) {
          const double w = k[(co * c_in + ci) * 3 + j];
          const std::size_t shift = j * dilation;
          for (std::size_t t = shift; t < L; ++t) o[t] += w * src[t - shift];
        }
      }
      for (std::size_t t = 0; t < L; ++t) o[t] = o[t] > 0.0 ? o[t] : 0.0;
    }
  }

  // d_out is the gradient w.r.t. the post-ReLU output and is masked in place.
  static void causal_conv_backward(const double* k, const double* in, const double* out,
                                   double* d_out, double* gk, double* gb, double* d_in,
                                   std::size_t c_in, std::size_t c_out, std::size_t L,
                                   std::size_t dilation) {
    if (d_in) std::fill(d_in, d_in + c_in * L, 0.0);
    for (std::size_t co = 0; co < c_out; ++co) {
      double* d = d_out + co * L;
      const double* o = out + co * L;
      for (std::size_t t = 0; t < L; ++t) {
        if (o[t] <= 0.0) d[t] = 0.0;
        gb[co] += d[t];
      }
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const double* src = in + ci * L;
        for (std::size_t j = 0; j < 3; ++j) {
          const std::size_t idx = (co * c_in + ci) * 3 + j;
          const std::size_t shift = j * dilation;
          double acc = 0.0;
          for (std::size_t t = shift; t < L; ++t) acc += d[t] * src[t - shift];
          gk[idx] += acc;
          if (d_in) {
            const double w = k[idx];
            double* di = d_in + ci * L;
            for (std::size_t t = shift; t < L; ++t) di[t - shift] += w * d[t];
          }
        }
      }
    }
  }

  void forward_tcn(std::span<const double> p, std::span<double> y, Tape& tape) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, C = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* k1 = p.data();
    const double* b1 = k1 + C * 3;
    const double* k2 = b1 + C;
    const double* b2 = k2 + C * C * 3;
    const double* Wo = b2 + C;
    const double* bo = Wo + H * C * L;
    tape.hidden.resize(B * C * L);
    tape.hidden2.resize(B * C * L);
    for (std::size_t b = 0; b < B; ++b) {
      causal_conv(k1, b1, tape.input.data() + b * L, tape.hidden.data() + b * C * L, 1, C, L, 1);
      causal_conv(k2, b2, tape.hidden.data() + b * C * L, tape.hidden2.data() + b * C * L, C, C,
                  L, 2);
    }
    affine(Wo, bo, tape.hidden2.data(), y.data(), B, H, C * L);
  }

  void backward_tcn(std::span<const double> p, const Tape& tape, std::span<const double> dy,
                    std::span<double> grad) const {
    const std::size_t L = spec_.context_len, H = spec_.horizon, C = spec_.hidden_width;
    const std::size_t B = tape.batch;
    const double* k2 = p.data() + C * 3 + C;
    const double* Wo = k2 + C * C * 3 + C;
    double* gk1 = grad.data();
    double* gb1 = gk1 + C * 3;
    double* gk2 = gb1 + C;
    double* gb2 = gk2 + C * C * 3;
    double* gWo = gb2 + C;
    double* gbo = gWo + H * C * L;
    std::vector<double> d2(B * C * L), d1(C * L);
    affine_backward(Wo, tape.hidden2.data(), dy.data(), gWo, gbo, d2.data(), B, H, C * L);
    for (std::size_t b = 0; b < B; ++b) {
      causal_conv_backward(k2, tape.hidden.data() + b * C * L, tape.hidden2.data() + b * C * L,
                           d2.data() + b * C * L, gk2, gb2, d1.data(), C, C, L, 2);
      causal_conv_backward(nullptr, tape.input.data() + b * L, tape.hidden.data() + b * C * L,
                           d1.data(), gk1, gb1, nullptr, 1, C, L, 1);
    }
  }

  ForecasterSpec spec_;
};

struct ForecasterModel {
  ForecasterSpec spec;
  std::vector<double> parameters;
  ClassLabel label = ClassLabel::Wake;
  std::uint64_t train_seed = 0;
  std::vector<double> loss_curve;

  std::string id() const {
    return std::string(to_string(spec.architecture)) + "-L" + std::to_string(spec.context_len) +
           "-H" + std::to_string(spec.horizon) + "-" + to_string(label) + "-s" +
           std::to_string(train_seed);
  }

  friend bool operator==(const ForecasterModel&, const ForecasterModel&) = default;
};

inline ForecasterModel init_model(const ForecasterSpec& spec, std::uint64_t seed,
                                  ClassLabel label = ClassLabel::Wake) {
  const ForecastNet net(spec);
  ForecasterModel model{spec, std::vector<double>(net.parameter_count()), label, seed, {}};
  Rng rng(derive_seed(seed, "forecaster-init"));
  net.init(model.parameters, rng);
  return model;
}

// Batched forward pass with per-window mean centring. `contexts` is B x L,
// `out` B x H.
inline void predict_batch(const ForecastNet& net, std::span<const double> params,
                          std::span<const double> contexts, std::span<double> out,
                          std::size_t batch, Tape& tape, std::vector<double>& centred) {
  const std::size_t L = net.spec().context_len, H = net.spec().horizon;
  centred.resize(batch * L);
  std::vector<double> means(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto ctx = contexts.subspan(b * L, L);
    means[b] = mean_of(ctx);
    for (std::size_t i = 0; i < L; ++i) centred[b * L + i] = ctx[i] - means[b];
  }
  net.forward(params, centred, out, batch, tape);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < H; ++j) out[b * H + j] += means[b];
}

inline void predict_into(const ForecastNet& net, std::span<const double> params,
                         std::span<const double> context, std::span<double> out, Tape& tape,
                         std::vector<double>& centred) {
  predict_batch(net, params, context, out, 1, tape, centred);
}

inline std::vector<double> predict(const ForecasterModel& model,
                                   std::span<const double> context) {
  require(context.size() == model.spec.context_len,
          "predict: context length " + std::to_string(context.size()) + " != L=" +
              std::to_string(model.spec.context_len));
  require(all_finite(context), "predict: non-finite context");
  const ForecastNet net(model.spec);
  std::vector<double> out(model.spec.horizon), centred;
  Tape tape;
  predict_into(net, model.parameters, context, out, tape, centred);
  return out;
}

// Mean Huber loss over a batch; gradient w.r.t. params accumulated into `grad`
// when it is non-empty.
inline double batch_loss(const ForecastNet& net, std::span<const double> params,
                         std::span<const WindowPair> batch, double delta,
                         std::span<double> grad = {}) {
  const std::size_t L = net.spec().context_len, H = net.spec().horizon, B = batch.size();
  std::vector<double> contexts(B * L), pred(B * H), dpred(B * H, 0.0), centred;
  for (std::size_t b = 0; b < B; ++b)
    std::copy(batch[b].context.begin(), batch[b].context.end(), contexts.begin() + b * L);
  Tape tape;
  predict_batch(net, params, contexts, pred, B, tape, centred);
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::span<const double> row(pred.data() + b * H, H);
    loss += huber_loss(row, batch[b].target, delta) * scale;
    if (!grad.empty())
      huber_gradient_into(row, batch[b].target, delta, scale,
                          std::span<double>(dpred.data() + b * H, H));
  }
  if (!grad.empty()) net.backward(params, tape, dpred, grad);
  return loss;
}

class Adam {
 public:
  explicit Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : m_(n, 0.0), v_(n, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  std::vector<double> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

// Runs exactly config.max_steps Adam steps. Batches are drawn from a seeded
// permutation; when fewer than a full batch remain the pairs are reshuffled.
inline ForecasterModel train_class_forecaster(std::span<const WindowPair> pairs,
                                              const ForecasterSpec& spec,
                                              const TrainConfig& config,
                                              ClassLabel label = ClassLabel::Wake) {
  config.validate();
  require(!pairs.empty(),
          std::string("train_class_forecaster: no training pairs for class ") + to_string(label) +
              " (runs shorter than L+H?)",
          ErrorKind::InsufficientData);
  for (const auto& p : pairs)
    require(p.context.size() == spec.context_len && p.target.size() == spec.horizon,
            "train_class_forecaster: pair shape does not match spec");

  ForecasterModel model = init_model(spec, config.seed, label);
  const ForecastNet net(spec);
  Adam adam(model.parameters.size(), config.learning_rate);
  Rng rng(derive_seed(config.seed, "forecaster-shuffle"));

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::size_t cursor = 0;
  const std::size_t batch_size = std::min(config.batch_size, pairs.size());

  std::vector<double> grad(model.parameters.size());
  std::vector<WindowPair> batch(batch_size);
  model.loss_curve.reserve(config.max_steps);
  for (std::size_t step = 0; step < config.max_steps; ++step) {
    if (cursor + batch_size > order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    for (std::size_t b = 0; b < batch_size; ++b) batch[b] = pairs[order[cursor + b]];
    cursor += batch_size;

    std::fill(grad.begin(), grad.end(), 0.0);
    const double loss = batch_loss(net, model.parameters, batch, config.huber_delta, grad);
    require(std::isfinite(loss),
            "train_class_forecaster: loss diverged at step " + std::to_string(step),
            ErrorKind::Divergence);
    adam.step(model.parameters, grad);
    model.loss_curve.push_back(loss);
  }
  return model;
}

}  // namespace fsynth
