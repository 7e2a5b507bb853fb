#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "ordvi/data.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/genmodels.hpp"
#include "ordvi/posterior.hpp"
#include "ordvi/training.hpp"

namespace ordvi {

/// Bad flags or configuration; maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

/// Everything `train` needs, from a `key = value` file plus overrides.
struct RunConfig {
  ModelKind model = ModelKind::adjacency;
  AdjModelConfig adjacency;
  SeqModelConfig sequence;
  bool learnedPosterior = true;
  PosteriorConfig posterior;
  TrainConfig train;

  std::string data;       // dataset path, or empty to use the generator
  std::string generator;  // community | er
  CommunityConfig community;
  std::size_t erNodes = 12;
  double erP = 0.3;
  /// 1 keeps every graph for training.
  double trainFraction = 1.0;
  std::string outDir = ".";
  std::size_t checkpointEvery = 0;

  std::size_t maxNodes() const { return model == ModelKind::adjacency ? adjacency.maxNodes : sequence.maxNodes; }
};

/// Applies one key; UsageError on unknown keys or unparsable values.
void setConfigValue(RunConfig& cfg, std::string_view key, std::string_view value);
/// Parses `key = value` lines with `#` comments on top of `base`.
RunConfig parseRunConfig(std::string_view text, RunConfig base = {});
/// Range checks that must pass before any work starts.
void validateRunConfig(const RunConfig& cfg);
/// Every accepted key with its current value, for --help and reports.
std::string describeConfigKeys(const RunConfig& cfg = {});

/// Entry point of the command-line tool.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordvi
