#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asca/design.hpp"
#include "asca/tensor.hpp"

namespace asca {

// Raw "[section name]" / "key = value" document. Grammar in docs/config.md.
struct ConfigSection {
  std::string kind;
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(std::string_view key) const;
};

std::vector<ConfigSection> parse_config_document(const std::string& text);

struct AggregateDirective {
  std::string mode;
  std::size_t block = 1;
  bool absorb_remainder = false;
  std::optional<std::string> rename;
};

enum class Scaling { Center, Autoscale };

struct FactorDecl {
  std::string name;
  FactorKind kind = FactorKind::Nominal;
  std::optional<std::string> nested_in;
};

struct PlotToggles {
  bool scores = true;
  bool loadings = true;
  bool biplot = true;
  bool mspc = true;
  bool acf = true;
  bool boxplot = true;
};

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<std::string> series_mode;
  std::vector<std::string> series_levels;
  std::optional<Timestamp> origin;
  int year_start_day = 0;

  std::vector<CalendarModeSpec> modes;
  std::vector<AggregateDirective> aggregations;
  std::vector<std::string> row_modes;
  std::vector<std::string> col_modes;

  std::optional<std::size_t> exclude_threshold;
  std::optional<Scaling> scaling;

  std::vector<FactorDecl> factors;
  std::vector<std::pair<std::string, std::string>> interactions;

  std::size_t permutations = 0;
  std::optional<std::uint64_t> seed;
  std::string reference = "residuals";
  std::size_t components = 2;
  unsigned workers = 1;
  double percentile = 99.0;
  std::size_t acf_max_lag = 20;
  bool dump_null = false;

  std::filesystem::path output_dir;
  bool plots = true;
  PlotToggles plot;

  // Hash of the configuration text, recorded in the run manifest.
  std::string source_hash;
};

struct Violation {
  std::string field;
  std::string message;
};

struct ConfigLoad {
  PipelineConfig config;
  std::vector<Violation> violations;  // syntax and type errors
};

// Relative paths in the document resolve against base_dir.
ConfigLoad load_config(const std::string& text, const std::filesystem::path& base_dir);
ConfigLoad load_config_file(const std::filesystem::path& path);

// Semantic checks; empty iff the pipeline's preconditions hold.
std::vector<Violation> validate(const PipelineConfig& config);

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace asca
