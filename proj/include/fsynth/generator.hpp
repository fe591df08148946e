#pragma once

// Recursive sliding-window synthesis: one synthetic epoch per source epoch,
// seeded from the source epoch's first L samples and produced by the
// forecaster of the source epoch's class.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fsynth/forecasters.hpp"
#include "fsynth/signal.hpp"

namespace fsynth {

// Generic rollout over any chunk predictor `predict(context) -> vector` that
// returns `horizon` values. The initial context is not part of the output.
template <typename Predictor>
std::vector<double> generate_recursive(Predictor&& predict, std::span<const double> initial_context,
                                       std::size_t horizon, std::size_t target_len) {
  require(target_len >= 1, "generate_recursive: target_len must be >= 1");
  require(horizon >= 1, "generate_recursive: horizon must be >= 1");
  const std::size_t L = initial_context.size();
  std::vector<double> context(initial_context.begin(), initial_context.end());
  std::vector<double> output;
  output.reserve(target_len + horizon);
  std::size_t step = 0;
  while (output.size() < target_len) {
    const std::vector<double> chunk = predict(std::span<const double>(context));
    require(chunk.size() == horizon, "generate_recursive: predictor returned wrong length");
    for (std::size_t i = 0; i < chunk.size(); ++i)
      require(std::isfinite(chunk[i]),
              "generate_recursive: non-finite prediction at step " + std::to_string(step) +
                  ", offset " + std::to_string(i),
              ErrorKind::Divergence);
    output.insert(output.end(), chunk.begin(), chunk.end());
    // Next context: last L values of (initial context ++ output).
    if (output.size() >= L) {
      context.assign(output.end() - static_cast<std::ptrdiff_t>(L), output.end());
    } else {
      std::vector<double> next(context.end() - static_cast<std::ptrdiff_t>(L - output.size()),
                               context.end());
      next.insert(next.end(), output.begin(), output.end());
      context = std::move(next);
    }
    ++step;
  }
  output.resize(target_len);
  return output;
}

inline std::vector<double> generate_recursive(const ForecasterModel& model,
                                              std::span<const double> initial_context,
                                              std::size_t target_len) {
  require(initial_context.size() == model.spec.context_len,
          "generate_recursive: context length does not match model L");
  const ForecastNet net(model.spec);
  Tape tape;
  std::vector<double> centred;
  auto step = [&](std::span<const double> ctx) {
    std::vector<double> out(model.spec.horizon);
    predict_into(net, model.parameters, ctx, out, tape, centred);
    return out;
  };
  return generate_recursive(step, initial_context, model.spec.horizon, target_len);
}

using ModelSet = std::map<ClassLabel, ForecasterModel>;

struct SkippedEpoch {
  EpochKey source;
  std::string reason;
};

struct SyntheticDataset {
  Dataset data;
  std::string source_dataset_id;
  std::map<ClassLabel, std::string> model_ids;
  std::uint64_t generation_seed = 0;
  std::vector<SkippedEpoch> skipped;
};

// Generation is deterministic; `seed` is recorded in provenance only.
inline SyntheticDataset synthesize_dataset(const ModelSet& models, const Dataset& source,
                                           std::size_t target_len, std::uint64_t seed,
                                           std::string source_dataset_id = "source") {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (source.class_counts()[c] == 0) continue;
    require(models.contains(label_at(c)),
            std::string("synthesize_dataset: no trained model for class ") +
                to_string(label_at(c)),
            ErrorKind::MissingArtifact);
  }
  SyntheticDataset out;
  out.source_dataset_id = std::move(source_dataset_id);
  out.generation_seed = seed;
  for (const auto& [label, model] : models) out.model_ids[label] = model.id();

  for (const auto& epoch : source) {
    const auto& model = models.at(epoch.label);
    const std::size_t L = model.spec.context_len;
    if (epoch.signal.size() < L) {
      out.skipped.push_back({epoch.key(), "epoch shorter than context length " +
                                              std::to_string(L)});
      continue;
    }
    auto samples = generate_recursive(model, epoch.signal.samples().first(L), target_len);
    Provenance prov{SyntheticOrigin{model.id(), epoch.key(), seed}};
    out.data.add(LabeledEpoch{Signal(std::move(samples), epoch.signal.sample_rate()),
                              epoch.label, epoch.subject_id, epoch.epoch_index,
                              std::move(prov)});
  }
  return out;
}

}  // namespace fsynth
