#include <gtest/gtest.h>

#include <fstream>

#include "fsynth/config.hpp"

using namespace fsynth;

TEST(Config, DefaultsMatchPublishedSettings) {
  const PipelineConfig c;
  EXPECT_EQ(c.forecaster_train.batch_size, 32u);
  EXPECT_EQ(c.forecaster_train.max_steps, 1000u);
  EXPECT_EQ(c.forecaster_train.learning_rate, 1e-3);
  EXPECT_EQ(c.window.horizon, 500u);
  EXPECT_EQ(c.stft.window_len, 128u);
  EXPECT_EQ(c.stft.hop, 64u);
  EXPECT_EQ(c.classifier.learning_rate, 1e-4);
  EXPECT_EQ(c.seeds, 5u);
  EXPECT_EQ(c.sample_rate, 100);
  EXPECT_EQ(c.epoch_seconds, 5.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.base_seed = 9;
  c.window_sweep = {10, 50};
  c.forecasters = {{Architecture::TcnLite, 4}};
  c.conditions = {Condition::OS};
  c.labeling.emg_threshold_factor = 2.0;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, PartialDocumentUsesDefaults) {
  const auto c = config_from_json(json::parse(R"({"seeds": 2, "window": {"sweep": [25]}})"));
  EXPECT_EQ(c.seeds, 2u);
  EXPECT_EQ(c.window_sweep, std::vector<std::size_t>{25});
  EXPECT_EQ(c.window.horizon, 500u);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(config_from_json(json::parse(R"({"seedz": 2})")), Error);
  EXPECT_THROW(config_from_json(json::parse(R"({"stft": {"windowlen": 2}})")), Error);
  EXPECT_THROW(config_from_json(json::parse(R"({"seeds": 0})")), Error);
  EXPECT_THROW(config_from_json(json::parse(R"({"seeds": "two"})")), Error);
  EXPECT_THROW(config_from_json(json::parse(R"({"forecasters": [{"architecture": "LSTM"}]})")),
               Error);
}

TEST(Config, HashIgnoresPathsOnly) {
  PipelineConfig a, b;
  b.paths.workdir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.base_seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, LoadResolvesInputRelativeToFile) {
  const auto dir = std::filesystem::temp_directory_path() / "fsynth_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "rec.bin") << "x";
  std::ofstream(dir / "cfg.json") << R"({"paths": {"input": "rec.bin"}})";
  const auto c = load_config(dir / "cfg.json");
  EXPECT_EQ(std::filesystem::path(c.paths.input), dir / "rec.bin");
  std::ofstream(dir / "bad.json") << R"({"paths": {"input": "missing.bin"}})";
  EXPECT_THROW(load_config(dir / "bad.json"), Error);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_THROW(load_config(dir / "broken.json"), Error);
  EXPECT_THROW(load_config(dir / "absent.json"), Error);
}
