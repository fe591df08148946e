#pragma once

// Small CNN over single-channel spectrograms:
//   [conv3x3 (same padding) -> ReLU -> maxpool 2x2] x blocks -> flatten -> affine -> softmax
// trained with plain mini-batch SGD on the summed cross-entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsynth/common.hpp"
#include "fsynth/features.hpp"
#include "fsynth/signal.hpp"

namespace fsynth {

struct ClassifierSpec {
  std::vector<std::size_t> conv_channels{8, 16};
  std::size_t input_bins = 65;
  std::size_t input_frames = 6;
  std::size_t num_classes = kNumClasses;

  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

struct ClassifierTrainConfig {
  double learning_rate = 1e-4;
  std::size_t max_epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    require(learning_rate > 0.0, "classifier: learning_rate must be > 0");
    require(max_epochs >= 1, "classifier: max_epochs must be >= 1");
    require(batch_size >= 1, "classifier: batch_size must be >= 1");
  }
};

struct TrainedClassifier {
  ClassifierSpec spec;
  std::vector<double> parameters;
  std::uint64_t train_seed = 0;
  std::vector<double> loss_curve;

  friend bool operator==(const TrainedClassifier&, const TrainedClassifier&) = default;
};

// Numerically stable -log softmax(logits)[true_class].
inline double cross_entropy_from_logits(std::span<const double> logits, std::size_t true_class) {
  require(true_class < logits.size(), "cross_entropy: class index out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return mx + std::log(s) - logits[true_class];
}

// Probabilities are mapped back to log space (floored at the smallest normal
// double) so a zero at the true class gives a large finite loss.
inline double cross_entropy(std::span<const double> probabilities, std::size_t true_class) {
  require(!probabilities.empty() && true_class < probabilities.size(),
          "cross_entropy: class index out of range");
  double total = 0.0;
  for (double p : probabilities) {
    require(p >= 0.0, "cross_entropy: negative probability");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-6, "cross_entropy: probabilities do not sum to 1");
  std::vector<double> logits(probabilities.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    logits[i] = std::log(std::max(probabilities[i], std::numeric_limits<double>::min()));
  return cross_entropy_from_logits(logits, true_class);
}

inline std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] = std::exp(logits[i] - mx));
  for (double& v : p) v /= s;
  return p;
}

class ConvNet {
 public:
  struct Shape {
    std::size_t channels, height, width;
    std::size_t size() const { return channels * height * width; }
  };

  struct Tape {
    std::vector<std::vector<double>> block_in;   // input of each block
    std::vector<std::vector<double>> conv_out;   // post-ReLU conv output
    std::vector<std::vector<std::size_t>> argmax;  // pooled element -> conv_out index
    std::vector<double> flat;
    std::vector<double> logits;
  };

  explicit ConvNet(ClassifierSpec spec) : spec_(std::move(spec)) {
    require(spec_.num_classes >= 2, "classifier: need at least two classes");
    require(!spec_.conv_channels.empty(), "classifier: need at least one conv block");
    Shape s{1, spec_.input_bins, spec_.input_frames};
    for (std::size_t c : spec_.conv_channels) {
      require(c >= 1, "classifier: conv block needs >= 1 channel");
      block_shapes_.push_back(s);
      s = {c, s.height / 2, s.width / 2};
      require(s.height >= 1 && s.width >= 1,
              "classifier: input " + std::to_string(spec_.input_bins) + "x" +
                  std::to_string(spec_.input_frames) + " too small for " +
                  std::to_string(spec_.conv_channels.size()) + " pooling blocks");
    }
    flat_size_ = s.size();
  }

  const ClassifierSpec& spec() const noexcept { return spec_; }
  std::size_t flat_size() const noexcept { return flat_size_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t b = 0; b < block_shapes_.size(); ++b)
      n += spec_.conv_channels[b] * block_shapes_[b].channels * 9 + spec_.conv_channels[b];
    return n + spec_.num_classes * flat_size_ + spec_.num_classes;
  }

  void init(std::span<double> p, Rng& rng) const {
    require(p.size() == parameter_count(), "ConvNet::init: wrong parameter count");
    std::size_t at = 0;
    auto fill = [&](std::size_t weights, std::size_t fan_in, std::size_t biases) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < weights; ++i) p[at++] = rng.uniform(-bound, bound);
      for (std::size_t i = 0; i < biases; ++i) p[at++] = 0.0;
    };
    for (std::size_t b = 0; b < block_shapes_.size(); ++b) {
      const std::size_t cin = block_shapes_[b].channels, cout = spec_.conv_channels[b];
      fill(cout * cin * 9, cin * 9, cout);
    }
    fill(spec_.num_classes * flat_size_, flat_size_, spec_.num_classes);
  }

  void forward(std::span<const double> p, std::span<const double> input, Tape& tape) const {
    require(input.size() == spec_.input_bins * spec_.input_frames,
            "classifier: input shape mismatch");
    const std::size_t blocks = block_shapes_.size();
    tape.block_in.resize(blocks);
    tape.conv_out.resize(blocks);
    tape.argmax.resize(blocks);
    std::vector<double> current(input.begin(), input.end());
    const double* params = p.data();
    for (std::size_t b = 0; b < blocks; ++b) {
      const Shape in = block_shapes_[b];
      const std::size_t cout = spec_.conv_channels[b];
      const double* k = params;
      const double* bias = k + cout * in.channels * 9;
      params = bias + cout;
      tape.block_in[b] = std::move(current);
      auto& conv = tape.conv_out[b];
      conv.assign(cout * in.height * in.width, 0.0);
      conv2d_same(k, bias, tape.block_in[b].data(), conv.data(), in, cout);
      for (double& v : conv) v = v > 0.0 ? v : 0.0;
      current = maxpool(conv, {cout, in.height, in.width}, tape.argmax[b]);
    }
    tape.flat = std::move(current);
    const double* W = params;
    const double* bias = W + spec_.num_classes * flat_size_;
    tape.logits.assign(spec_.num_classes, 0.0);
    for (std::size_t c = 0; c < spec_.num_classes; ++c) {
      tape.logits[c] = bias[c] + dot(W + c * flat_size_, tape.flat.data(), flat_size_);
    }
  }

  void backward(std::span<const double> p, const Tape& tape, std::span<const double> dlogits,
                std::span<double> grad) const {
    const std::size_t blocks = block_shapes_.size();
    std::vector<std::size_t> offsets(blocks + 1);
    std::size_t at = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      offsets[b] = at;
      at += spec_.conv_channels[b] * block_shapes_[b].channels * 9 + spec_.conv_channels[b];
    }
    offsets[blocks] = at;

    const double* W = p.data() + at;
    double* gW = grad.data() + at;
    double* gb = gW + spec_.num_classes * flat_size_;
    std::vector<double> d(flat_size_, 0.0);
    for (std::size_t c = 0; c < spec_.num_classes; ++c) {
      const double g = dlogits[c];
      gb[c] += g;
      const double* row = W + c * flat_size_;
      double* grow = gW + c * flat_size_;
      for (std::size_t i = 0; i < flat_size_; ++i) {
        grow[i] += g * tape.flat[i];
        d[i] += row[i] * g;
      }
    }

    for (std::size_t b = blocks; b-- > 0;) {
      const Shape in = block_shapes_[b];
      const std::size_t cout = spec_.conv_channels[b];
      const auto& conv = tape.conv_out[b];
      std::vector<double> dconv(conv.size(), 0.0);
      const auto& arg = tape.argmax[b];
      for (std::size_t i = 0; i < arg.size(); ++i) dconv[arg[i]] += d[i];
      for (std::size_t i = 0; i < conv.size(); ++i)
        if (conv[i] <= 0.0) dconv[i] = 0.0;
      const double* k = p.data() + offsets[b];
      double* gk = grad.data() + offsets[b];
      double* gbias = gk + cout * in.channels * 9;
      std::vector<double> din(b > 0 ? in.size() : 0, 0.0);
      conv2d_same_backward(k, tape.block_in[b].data(), dconv.data(), gk, gbias,
                           b > 0 ? din.data() : nullptr, in, cout);
      d = std::move(din);
    }
  }

 private:
  static void conv2d_same(const double* k, const double* bias, const double* in, double* out,
                          Shape s, std::size_t cout) {
    const std::ptrdiff_t H = static_cast<std::ptrdiff_t>(s.height);
    const std::ptrdiff_t Wd = static_cast<std::ptrdiff_t>(s.width);
    for (std::size_t co = 0; co < cout; ++co) {
      double* o = out + co * s.height * s.width;
      for (std::size_t i = 0; i < s.height * s.width; ++i) o[i] = bias[co];
      for (std::size_t ci = 0; ci < s.channels; ++ci) {
        const double* src = in + ci * s.height * s.width;
        const double* kk = k + (co * s.channels + ci) * 9;
        for (std::ptrdiff_t di = -1; di <= 1; ++di) {
          for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
            const double w = kk[(di + 1) * 3 + (dj + 1)];
            for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -di);
                 y < std::min<std::ptrdiff_t>(H, H - di); ++y) {
              const double* srow = src + (y + di) * Wd;
              double* orow = o + y * Wd;
              for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, -dj);
                   x < std::min<std::ptrdiff_t>(Wd, Wd - dj); ++x)
                orow[x] += w * srow[x + dj];
            }
          }
        }
      }
    }
  }

  static void conv2d_same_backward(const double* k, const double* in, const double* dout,
                                   double* gk, double* gbias, double* din, Shape s,
                                   std::size_t cout) {
    const std::ptrdiff_t H = static_cast<std::ptrdiff_t>(s.height);
    const std::ptrdiff_t Wd = static_cast<std::ptrdiff_t>(s.width);
    for (std::size_t co = 0; co < cout; ++co) {
      const double* d = dout + co * s.height * s.width;
      for (std::size_t i = 0; i < s.height * s.width; ++i) gbias[co] += d[i];
      for (std::size_t ci = 0; ci < s.channels; ++ci) {
        const double* src = in + ci * s.height * s.width;
        double* dsrc = din ? din + ci * s.height * s.width : nullptr;
        const double* kk = k + (co * s.channels + ci) * 9;
        double* gkk = gk + (co * s.channels + ci) * 9;
        for (std::ptrdiff_t di = -1; di <= 1; ++di) {
          for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
            const std::size_t widx = static_cast<std::size_t>((di + 1) * 3 + (dj + 1));
            const double w = kk[widx];
            double acc = 0.0;
            for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -di);
                 y < std::min<std::ptrdiff_t>(H, H - di); ++y) {
              const double* srow = src + (y + di) * Wd;
              const double* drow = d + y * Wd;
              for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, -dj);
                   x < std::min<std::ptrdiff_t>(Wd, Wd - dj); ++x) {
                acc += drow[x] * srow[x + dj];
                if (dsrc) dsrc[(y + di) * Wd + x + dj] += w * drow[x];
              }
            }
            gkk[widx] += acc;
          }
        }
      }
    }
  }

  // 2x2 stride-2 max pooling with floor semantics.
  static std::vector<double> maxpool(const std::vector<double>& in, Shape s,
                                     std::vector<std::size_t>& argmax) {
    const std::size_t oh = s.height / 2, ow = s.width / 2;
    std::vector<double> out(s.channels * oh * ow);
    argmax.assign(out.size(), 0);
    for (std::size_t c = 0; c < s.channels; ++c)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          std::size_t best = c * s.height * s.width + (2 * y) * s.width + 2 * x;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t idx = c * s.height * s.width + (2 * y + dy) * s.width + 2 * x + dx;
              if (in[idx] > in[best]) best = idx;
            }
          const std::size_t o = (c * oh + y) * ow + x;
          out[o] = in[best];
          argmax[o] = best;
        }
    return out;
  }

  ClassifierSpec spec_;
  std::vector<Shape> block_shapes_;
  std::size_t flat_size_ = 0;
};

inline ClassifierSpec classifier_spec_for(const Spectrogram& example,
                                          std::vector<std::size_t> conv_channels = {8, 16}) {
  return {std::move(conv_channels), example.bins, example.frames, kNumClasses};
}

inline TrainedClassifier init_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
  const ConvNet net(spec);
  TrainedClassifier model{spec, std::vector<double>(net.parameter_count()), seed, {}};
  Rng rng(derive_seed(seed, "classifier-init"));
  net.init(model.parameters, rng);
  return model;
}

inline std::vector<double> logits(const TrainedClassifier& model, const Spectrogram& spec) {
  require(spec.bins == model.spec.input_bins && spec.frames == model.spec.input_frames,
          "classifier: spectrogram shape " + std::to_string(spec.bins) + "x" +
              std::to_string(spec.frames) + " does not match model");
  const ConvNet net(model.spec);
  ConvNet::Tape tape;
  net.forward(model.parameters, spec.values, tape);
  return tape.logits;
}

inline std::vector<double> predict_proba(const TrainedClassifier& model, const Spectrogram& spec) {
  return softmax(logits(model, spec));
}

inline ClassLabel predict_label(const TrainedClassifier& model, const Spectrogram& spec) {
  const auto z = logits(model, spec);
  return label_at(static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin()));
}

// Summed cross-entropy over `indices`; gradient accumulated when non-empty.
inline double classifier_loss(const ConvNet& net, std::span<const double> params,
                              std::span<const Spectrogram> inputs,
                              std::span<const ClassLabel> labels,
                              std::span<const std::size_t> indices, std::span<double> grad = {}) {
  ConvNet::Tape tape;
  double loss = 0.0;
  for (std::size_t idx : indices) {
    net.forward(params, inputs[idx].values, tape);
    const std::size_t y = index_of(labels[idx]);
    loss += cross_entropy_from_logits(tape.logits, y);
    if (!grad.empty()) {
      auto dlogits = softmax(tape.logits);
      dlogits[y] -= 1.0;
      net.backward(params, tape, dlogits, grad);
    }
  }
  return loss;
}

inline TrainedClassifier train_classifier(std::span<const Spectrogram> inputs,
                                          std::span<const ClassLabel> labels,
                                          const ClassifierSpec& spec,
                                          const ClassifierTrainConfig& config) {
  config.validate();
  require(!inputs.empty(), "train_classifier: empty training set", ErrorKind::InsufficientData);
  require(inputs.size() == labels.size(), "train_classifier: inputs/labels length mismatch");
  for (const auto& s : inputs) {
    require(s.stage == SpectrogramStage::Standardized,
            "train_classifier: inputs must be standardized");
    require(s.bins == spec.input_bins && s.frames == spec.input_frames,
            "train_classifier: spectrogram shape mismatch");
  }

  TrainedClassifier model = init_classifier(spec, config.seed);
  const ConvNet net(spec);
  Rng rng(derive_seed(config.seed, "classifier-shuffle"));
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> grad(model.parameters.size());

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      const std::span<const std::size_t> batch(order.data() + start, n);
      epoch_loss += classifier_loss(net, model.parameters, inputs, labels, batch, grad);
      for (std::size_t i = 0; i < grad.size(); ++i)
        model.parameters[i] -= config.learning_rate * grad[i];
    }
    epoch_loss /= static_cast<double>(order.size());
    require(std::isfinite(epoch_loss),
            "train_classifier: loss diverged at epoch " + std::to_string(epoch),
            ErrorKind::Divergence);
    model.loss_curve.push_back(epoch_loss);
  }
  return model;
}

}  // namespace fsynth
