#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "asca/config.hpp"
#include "asca/pipeline.hpp"

namespace {

void print_violations(const std::vector<asca::Violation>& violations) {
  for (const auto& v : violations) std::cerr << "config error: " << v.field << ": " << v.message << '\n';
}

// Parse + validate; returns nullopt (after printing) when the document is unusable.
std::optional<asca::PipelineConfig> load(const std::string& path) {
  auto loaded = asca::load_config_file(path);
  auto violations = loaded.violations;
  if (violations.empty()) violations = asca::validate(loaded.config);
  if (!violations.empty()) {
    print_violations(violations);
    return std::nullopt;
  }
  return loaded.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate ANOVA of cyclostationary time series"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<unsigned> workers;
  auto* run_cmd = app.add_subcommand("run", "Run the analysis described by a config file");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("-w,--workers", workers, "Permutation worker threads (overrides model.workers)")
      ->check(CLI::PositiveNumber);

  auto* validate_cmd = app.add_subcommand("validate", "Check a config file without running it");
  validate_cmd->add_option("config", config_path, "Config file")->required();

  auto* version_cmd = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : asca::kExitConfigError;
  }

  if (version_cmd->parsed()) {
    std::cout << "asca " << asca::version() << '\n';
    return asca::kExitOk;
  }

  const auto config = load(config_path);
  if (!config) return asca::kExitConfigError;
  if (validate_cmd->parsed()) {
    std::cout << "ok\n";
    return asca::kExitOk;
  }

  asca::RunOptions options;
  options.workers = workers;
  const auto result = asca::run(*config, options);
  for (const auto& m : result.messages) std::cerr << m << '\n';
  if (result.exit_code == asca::kExitOk) {
    std::cout << "wrote " << result.files.size() << " files to " << config->output_dir.string() << '\n';
  }
  return result.exit_code;
}
