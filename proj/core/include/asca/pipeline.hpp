#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asca/config.hpp"
#include "asca/diagnostics.hpp"
#include "asca/factorization.hpp"
#include "asca/inference.hpp"
#include "asca/preprocess.hpp"
#include "asca/sca.hpp"

namespace asca {

std::string version();

// Everything a run produces, before it is written to disk.
struct PipelineArtifacts {
  DesignTable table;  // after exclusion, imputation and scaling
  ExclusionReport exclusion;
  std::size_t imputed = 0;
  std::size_t cells_before_imputation = 0;
  ScalingResult scaling;
  BuildReport build;
  DesignMatrix design;
  EffectDecomposition decomposition;
  AnovaTable anova;
  std::vector<PermutationResult> permutations;
  std::vector<ScaView> views;
  std::map<std::string, std::vector<std::string>> term_row_groups;  // per term, per row
  MspcChart mspc;
  std::vector<double> acf;
  std::map<std::string, std::vector<BoxSummary>> dispersion;  // per factor
  std::vector<std::string> warnings;
};

// build -> aggregate -> unfold -> preprocess -> fit -> test -> project ->
// diagnose, entirely in memory. Throws asca::Error on data problems.
PipelineArtifacts analyze(const PipelineConfig& config);

// File-name-safe form of a term name ("year:sensor" -> "year_x_sensor").
std::string term_file_stem(const std::string& term);

// Writes the artifact set into `dir` (created if needed). Returns the written
// paths relative to dir, sorted.
std::vector<std::string> write_artifacts(const PipelineArtifacts& artifacts, const PipelineConfig& config,
                                         const std::filesystem::path& dir);

std::vector<std::string> emit_plots(const PipelineArtifacts& artifacts, const PipelineConfig& config,
                                    const std::filesystem::path& plot_dir);

enum ExitCode : int { kExitOk = 0, kExitDataError = 1, kExitConfigError = 2 };

struct RunOptions {
  std::optional<unsigned> workers;  // overrides model.workers
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> messages;
  std::vector<std::string> files;
};

// Validates, analyzes and writes the artifact set. Outputs are staged and
// moved into place only on success; a failed run leaves no partial output.
RunResult run(const PipelineConfig& config, const RunOptions& options = {});

}  // namespace asca
