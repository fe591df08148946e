// fsynth: label recordings, train forecasters, synthesize epochs and evaluate
// sleep-stage classifiers.
//
// Exit codes: 0 ok, 1 internal, 2 usage, 3 config, 4 missing artifact,
// 5 data, 6 leakage or config mismatch. Failures print one line to stderr:
//   error: code=<n> kind=<kind> message="<text>"

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fsynth/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kConfig = 3, kMissing = 4, kData = 5, kMismatch = 6 };

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << "error: code=" << code << " kind=" << kind << " message=\"" << escape(message)
            << "\"\n";
  return code;
}

int exit_code(fsynth::ErrorKind kind) {
  using fsynth::ErrorKind;
  switch (kind) {
    case ErrorKind::MissingArtifact: return kMissing;
    case ErrorKind::Leakage:
    case ErrorKind::ConfigMismatch: return kMismatch;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::InsufficientData:
    case ErrorKind::Divergence: return kData;
  }
  return kInternal;
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<std::string> condition;
  std::optional<std::string> forecaster;
  std::string out;
  bool print_default = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forecast-based synthetic sleep-stage data pipeline", "fsynth"};
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "pipeline config JSON");
  app.add_option("--seed", flags.seed, "override base_seed");
  app.add_option("--window", flags.window, "restrict to one context length L");
  app.add_option("--condition", flags.condition, "restrict to one condition (O, S, OS)");
  app.add_option("--forecaster", flags.forecaster, "restrict to one forecaster");
  app.add_option("--out", flags.out, "work directory (overrides paths.workdir)");
  app.add_flag("--print-default-config", flags.print_default, "print the default config and exit");

  const char* names[] = {"label", "train-forecasters", "synthesize", "evaluate", "demo"};
  const char* help[] = {"label epochs of a recording (or the toy benchmark)",
                        "train per-class forecasters on the training split",
                        "generate synthetic epochs from trained forecasters",
                        "train and score classifiers, write reports",
                        "run every stage on the toy benchmark"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(names); ++i) subs.push_back(app.add_subcommand(names[i], help[i]));
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  if (flags.print_default) {
    std::cout << fsynth::to_json(fsynth::PipelineConfig{}).dump(2) << "\n";
    return kOk;
  }
  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();
  if (command.empty()) return fail(kUsage, "usage", "no subcommand given (see --help)");

  fsynth::PipelineConfig config;
  fsynth::GridSelection selection;
  try {
    if (!flags.config.empty()) config = fsynth::load_config(flags.config);
    if (flags.seed) config.base_seed = *flags.seed;
    if (!flags.out.empty()) config.paths.workdir = flags.out;
    if (command == "demo") config.paths.input.clear();
    config.validate();
    if (flags.forecaster) {
      const bool known = std::any_of(config.forecasters.begin(), config.forecasters.end(),
                                     [&](const fsynth::ForecasterEntry& f) {
                                       return f.name() == *flags.forecaster ||
                                              fsynth::to_string(f.architecture) == *flags.forecaster;
                                     });
      fsynth::require(known, "forecaster '" + *flags.forecaster + "' is not in the config");
      selection.forecaster = flags.forecaster;
    }
    if (flags.window) {
      fsynth::require(std::find(config.window_sweep.begin(), config.window_sweep.end(),
                                *flags.window) != config.window_sweep.end(),
                      "window " + std::to_string(*flags.window) + " is not in window.sweep");
      selection.window = flags.window;
    }
    if (flags.condition) selection.condition = fsynth::parse_condition(*flags.condition);
  } catch (const fsynth::Error& e) {
    return fail(kConfig, fsynth::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(kConfig, "config", e.what());
  }

  const fsynth::Stage stage{config, {config.workdir()}, selection,
                            [](const std::string& m) { std::cerr << "[fsynth] " << m << "\n"; }};
  try {
    if (command == "label") {
      fsynth::stage_label(stage);
    } else if (command == "train-forecasters") {
      fsynth::stage_train_forecasters(stage);
    } else if (command == "synthesize") {
      fsynth::stage_synthesize(stage);
    } else {
      const auto result =
          command == "demo" ? fsynth::stage_demo(stage) : fsynth::stage_evaluate(stage);
      std::cout << fsynth::aggregate_csv(result.aggregate, stage.hash());
      const auto failed = std::count_if(result.reports.begin(), result.reports.end(),
                                        [](const fsynth::RunReport& r) { return !r.ok; });
      if (failed > 0) std::cerr << "[fsynth] " << failed << " run(s) failed, see reports\n";
    }
  } catch (const fsynth::Error& e) {
    return fail(exit_code(e.kind()), fsynth::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kOk;
}
