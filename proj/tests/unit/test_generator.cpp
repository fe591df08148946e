#include <gtest/gtest.h>

#include "fsynth/generator.hpp"

using namespace fsynth;

namespace {
Dataset source(std::size_t per_class, std::size_t n = 120) {
  Dataset d;
  Rng rng(3);
  std::int64_t idx = 0;
  for (std::size_t k = 0; k < per_class; ++k)
    for (auto l : kAllLabels) {
      std::vector<double> x(n);
      for (auto& v : x) v = rng.normal();
      d.add({Signal(std::move(x), 100), l, "s", idx++, {}});
    }
  return d;
}

ModelSet models(std::size_t L, std::size_t H, std::uint64_t seed = 1) {
  ModelSet m;
  for (auto l : kAllLabels) m.emplace(l, init_model(make_spec(Architecture::LinearDms, L, H), seed, l));
  return m;
}
}  // namespace

TEST(Recursive, CallCountAndLength) {
  for (std::size_t H : {100u, 200u, 500u}) {
    std::size_t calls = 0;
    auto predictor = [&](std::span<const double>) {
      ++calls;
      return std::vector<double>(H, static_cast<double>(calls));
    };
    const auto out = generate_recursive(predictor, std::vector<double>(10, 0.0), H, 500);
    EXPECT_EQ(out.size(), 500u);
    EXPECT_EQ(calls, (500 + H - 1) / H);
    EXPECT_EQ(out.back(), static_cast<double>(calls));
  }
}

TEST(Recursive, SingleCallOutputIsChunk) {
  std::vector<double> chunk(500);
  for (std::size_t i = 0; i < chunk.size(); ++i) chunk[i] = static_cast<double>(i);
  std::size_t calls = 0;
  auto predictor = [&](std::span<const double>) {
    ++calls;
    return chunk;
  };
  EXPECT_EQ(generate_recursive(predictor, std::vector<double>(5, 1.0), 500, 500), chunk);
  EXPECT_EQ(calls, 1u);
}

TEST(Recursive, ContextSlidesOverOutput) {
  // Predictor emits the context sum; check the second call sees the window
  // made of the tail of the initial context and the first chunk.
  std::vector<std::vector<double>> seen;
  auto predictor = [&](std::span<const double> ctx) {
    seen.emplace_back(ctx.begin(), ctx.end());
    return std::vector<double>{100.0 + seen.size(), 200.0 + seen.size()};
  };
  generate_recursive(predictor, std::vector<double>{1, 2, 3}, 2, 6);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[1], (std::vector<double>{3, 101, 201}));
  EXPECT_EQ(seen[2], (std::vector<double>{201, 102, 202}));
}

TEST(Recursive, ZeroModelConstantContext) {
  auto model = init_model(make_spec(Architecture::LinearDms, 20, 200), 0);
  std::fill(model.parameters.begin(), model.parameters.end(), 0.0);
  for (std::size_t n : {1u, 199u, 500u, 1234u}) {
    const auto out = generate_recursive(model, std::vector<double>(20, 0.625), n);
    ASSERT_EQ(out.size(), n);
    for (double v : out) ASSERT_EQ(v, 0.625);
  }
}

TEST(Recursive, NonFiniteIsDivergence) {
  auto predictor = [](std::span<const double>) {
    return std::vector<double>{1.0, std::numeric_limits<double>::infinity()};
  };
  try {
    generate_recursive(predictor, std::vector<double>{0.0}, 2, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
  }
}

TEST(Synthesize, PairingAndProvenance) {
  const auto src = source(10);
  const auto syn = synthesize_dataset(models(50, 100), src, 500, 99, "orig");
  ASSERT_EQ(syn.data.size(), 30u);
  EXPECT_EQ(syn.data.class_counts(), src.class_counts());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& e = syn.data[i];
    EXPECT_EQ(e.label, src[i].label);
    EXPECT_EQ(e.signal.size(), 500u);
    EXPECT_TRUE(all_finite(e.signal.samples()));
    ASSERT_TRUE(e.provenance.synthetic.has_value());
    EXPECT_EQ(e.provenance.synthetic->source, src[i].key());
    EXPECT_EQ(e.provenance.synthetic->seed, 99u);
    EXPECT_EQ(e.provenance.synthetic->model_id, syn.model_ids.at(e.label));
  }
  EXPECT_TRUE(syn.skipped.empty());
}

TEST(Synthesize, DeterministicAndSeedOnlyInProvenance) {
  const auto src = source(4);
  const auto m = models(30, 64);
  const auto a = synthesize_dataset(m, src, 200, 1);
  const auto b = synthesize_dataset(m, src, 200, 1);
  const auto c = synthesize_dataset(m, src, 200, 2);
  EXPECT_EQ(a.data, b.data);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    EXPECT_EQ(a.data[i].signal, c.data[i].signal);
}

TEST(Synthesize, ShortEpochsAreSkippedAndReported) {
  Dataset src = source(2, 120);
  src.add({Signal(std::vector<double>(20, 0.0), 100), ClassLabel::Rem, "s", 99, {}});
  const auto syn = synthesize_dataset(models(50, 100), src, 100, 0);
  EXPECT_EQ(syn.data.size(), src.size() - 1);
  ASSERT_EQ(syn.skipped.size(), 1u);
  EXPECT_EQ(syn.skipped[0].source.epoch_index, 99);
}

TEST(Synthesize, MissingClassModel) {
  auto m = models(20, 20);
  m.erase(ClassLabel::Wake);
  try {
    synthesize_dataset(m, source(1), 50, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingArtifact);
  }
}
