#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tts/classify.hpp"
#include "tts/engine.hpp"
#include "tts/problem.hpp"
#include "tts/rl.hpp"
#include "tts/schedule.hpp"

namespace tts {

/// Malformed or semantically invalid configuration text. Messages carry the
/// line number (syntax) or the section.key path (semantics).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A flat, sectioned key-value experiment description:
///
///   [section]
///   key = value          # '#' starts a comment
///
/// Vector values are space-separated numbers; matrix values separate rows
/// with ';'. Unknown sections or keys are rejected so that a typo cannot
/// silently change an experiment.
struct ExperimentConfig {
  std::optional<TwoTimeScaleProblem> problem;

  struct RlSection {
    MDPSpec mdp;
    PolicyPair policies;
    FeatureMap features;
    Algorithm algorithm = Algorithm::Tdc;
  };
  std::optional<RlSection> rl;

  std::optional<BlockSystem> blocks;
  std::vector<double> kappa_grid;  // classify grid; default when empty

  std::optional<StepSchedule> schedule;

  struct SimulationSection {
    SimulationMode mode = SimulationMode::TwoTimescale;
    double kappa = 1.0;
    long paths = 1;
    long horizon = 0;
    std::vector<long> checkpoints;  // resolved list
    std::uint64_t seed = 0;
    InitPolicy init;
    ChainStart start = ChainStart::stationary();
  };
  std::optional<SimulationSection> simulation;

  struct OutputSection {
    std::string path;
    int precision = 17;
  };
  std::optional<OutputSection> output;

  struct SweepSection {
    std::string parameter;  // "xi" or "beta"
    std::vector<double> values;
  };
  std::optional<SweepSection> sweep;
};

/// Lexical layer: sections in file order, each with its key-value entries
/// and source lines. serialize() emits a normalized form whose re-parse is
/// identical, making parse/serialize idempotent.
struct RawConfig {
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
    int line = 0;
  };
  std::vector<Section> sections;

  static RawConfig parse(const std::string& text);
  std::string serialize() const;
};

/// Parses and fully validates a config; all module-level invariants are
/// enforced here (chain stochasticity, policy coverage, feature rank, ...).
ExperimentConfig parse_config(const std::string& text);

}  // namespace tts
