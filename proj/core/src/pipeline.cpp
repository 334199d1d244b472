#include "asca/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "asca/error.hpp"
#include "asca/svg.hpp"

#ifndef ASCA_VERSION
#define ASCA_VERSION "0.0.0"
#endif

namespace asca {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

const LevelLabel& label_of(const LabelTuple& tuple, const std::string& mode) {
  for (const auto& l : tuple) {
    if (l.mode == mode) return l;
  }
  throw Error(ErrorCode::UnknownMode, "row labels carry no mode '" + mode + "'");
}

struct CodedFactor {
  FactorSpec spec;
  std::vector<std::string> level_names;  // per row
};

// Factor levels from the row labels of the unfolded table. Nominal factors are
// re-indexed over the levels actually present; ordinal factors keep their
// calendar spacing.
std::vector<CodedFactor> code_factors(const PipelineConfig& config, const DesignTable& table,
                                      std::vector<std::string>& warnings) {
  std::map<std::string, std::size_t> cardinality;
  for (const auto& m : table.modes) cardinality[m.name] = m.cardinality;

  std::vector<CodedFactor> coded;
  for (const auto& decl : config.factors) {
    CodedFactor cf;
    cf.spec.name = decl.name;
    cf.spec.kind = decl.kind;
    cf.spec.nested_in = decl.nested_in;
    std::vector<int> raw;
    for (const auto& row : table.row_labels) {
      const auto& own = label_of(row, decl.name);
      int level = static_cast<int>(own.level);
      std::string name = own.name;
      if (decl.nested_in) {
        const auto& outer = label_of(row, *decl.nested_in);
        level += static_cast<int>(outer.level * cardinality.at(decl.name));
        name = outer.name + "/" + name;
      }
      raw.push_back(level);
      cf.level_names.push_back(std::move(name));
    }
    const std::set<int> present(raw.begin(), raw.end());
    if (present.size() < 2) {
      throw Error(ErrorCode::DegenerateFactor, "factor '" + decl.name + "' has fewer than 2 observed levels");
    }
    if (decl.kind == FactorKind::Ordinal) {
      cf.spec.levels = raw;
      cf.spec.n_levels = static_cast<int>(cardinality.at(decl.name));
    } else {
      std::map<int, int> compact;
      for (int l : present) compact.emplace(l, static_cast<int>(compact.size()));
      for (int l : raw) cf.spec.levels.push_back(compact.at(l));
      cf.spec.n_levels = static_cast<int>(compact.size());
      const auto declared = decl.nested_in ? cardinality.at(decl.name) * cardinality.at(*decl.nested_in)
                                           : cardinality.at(decl.name);
      if (!decl.nested_in && compact.size() < declared) {
        warnings.push_back("factor '" + decl.name + "': " + std::to_string(declared - compact.size()) +
                           " level(s) absent after row exclusion were dropped from the coding");
      }
    }
    coded.push_back(std::move(cf));
  }
  return coded;
}

std::string label_header(const std::vector<std::string>& modes) {
  std::string h;
  for (const auto& m : modes) h += csv_field(m) + ",";
  return h;
}

std::string label_fields(const LabelTuple& label) {
  std::string s;
  for (const auto& l : label) s += csv_field(l.name) + ",";
  return s;
}

}  // namespace

std::string version() { return ASCA_VERSION; }

std::string term_file_stem(const std::string& term) {
  std::string out;
  for (char c : term) {
    if (c == ':') out += "_x_";
    else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') out += c;
    else out += '_';
  }
  return out;
}

PipelineArtifacts analyze(const PipelineConfig& config) {
  PipelineArtifacts a;

  std::ifstream in(config.input, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + config.input.string() + "'");
  const auto records = read_records(in);

  CalendarOptions calendar;
  calendar.series_mode = config.series_mode;
  calendar.series_levels = config.series_levels;
  calendar.origin = config.origin;
  calendar.year_start_day = config.year_start_day;
  auto tensor = build_tensor(records, config.modes, calendar, &a.build);
  if (a.build.leap_day_records_dropped > 0) {
    a.warnings.push_back(std::to_string(a.build.leap_day_records_dropped) + " record(s) on Feb 29 dropped");
  }
  for (const auto& agg : config.aggregations) {
    tensor = aggregate_mode(tensor, agg.mode, agg.block, agg.absorb_remainder, agg.rename);
  }

  auto table = unfold(tensor, config.row_modes, config.col_modes);
  // Without an explicit threshold only rows with no observation at all go.
  const auto threshold = config.exclude_threshold.value_or(static_cast<std::size_t>(table.cols()) - 1);
  table = drop_rows_by_missing(table, threshold, &a.exclusion);
  a.cells_before_imputation = static_cast<std::size_t>(table.rows() * table.cols());
  table = impute_column_mean(table, &a.imputed);
  a.scaling = config.scaling == Scaling::Autoscale ? autoscale(table.matrix) : mean_center(table.matrix);
  table.matrix = a.scaling.matrix;
  if (!a.scaling.zero_variance_columns.empty()) {
    a.warnings.push_back(std::to_string(a.scaling.zero_variance_columns.size()) +
                         " zero-variance column(s) left centered, not scaled");
  }
  a.table = std::move(table);
  const auto& x = a.table.matrix;

  const auto coded = code_factors(config, a.table, a.warnings);
  std::vector<FactorSpec> specs;
  for (const auto& cf : coded) specs.push_back(cf.spec);
  a.design = assemble_design(specs, config.interactions, x.rows());

  a.decomposition = fit(x, a.design);
  a.anova = anova_table(a.decomposition, a.design, config.reference);

  std::vector<std::string> terms;
  for (const auto& b : a.design.terms()) terms.push_back(b.name);
  PermutationOptions options;
  options.permutations = config.permutations;
  options.seed = config.seed.value_or(0);
  options.reference = config.reference;
  options.workers = config.workers;
  a.permutations = permutation_test(x, a.design, terms, options);
  apply_p_values(a.anova, a.permutations);

  std::map<std::string, const CodedFactor*> by_name;
  for (const auto& cf : coded) by_name[cf.spec.name] = &cf;
  for (const auto& b : a.design.terms()) {
    std::vector<std::string> groups;
    if (auto it = by_name.find(b.name); it != by_name.end()) {
      groups = it->second->level_names;
    } else {
      const auto colon = b.name.find(':');
      const auto& lhs = by_name.at(b.name.substr(0, colon))->level_names;
      const auto& rhs = by_name.at(b.name.substr(colon + 1))->level_names;
      for (std::size_t i = 0; i < lhs.size(); ++i) groups.push_back(lhs[i] + "/" + rhs[i]);
    }
    a.term_row_groups[b.name] = std::move(groups);
    const Eigen::Index r = std::min<Eigen::Index>({static_cast<Eigen::Index>(config.components), b.df,
                                                   x.rows(), x.cols()});
    auto view = pca_effect(a.decomposition.effect(b.name), r, b.name);
    if (view.components() > 0) view = augment_scores(std::move(view), a.decomposition.residuals);
    else view.scores_augmented.resize(x.rows(), 0);
    for (const auto& w : view.warnings) a.warnings.push_back(w);
    a.views.push_back(std::move(view));
  }

  // Residual diagnostics: Q from the residuals, D from a PCA of the fitted
  // model part (all effects, grand mean removed).
  int model_df = 0;
  for (const auto& b : a.design.terms()) model_df += b.df;
  const Eigen::Index r_model =
      std::min<Eigen::Index>({static_cast<Eigen::Index>(config.components), model_df, x.rows(), x.cols()});
  const Eigen::MatrixXd fitted = a.decomposition.fitted_without_mean();
  Eigen::MatrixXd scores(x.rows(), 0);
  Eigen::VectorXd sigma(0);
  if (fitted.squaredNorm() > 0.0 && r_model > 0) {
    const auto model_view = pca_effect(fitted, r_model);
    Eigen::Index keep = 0;
    while (keep < model_view.singular_values.size() &&
           model_view.singular_values(keep) > 1e-12 * model_view.singular_values(0)) {
      ++keep;
    }
    scores = model_view.scores_effect.leftCols(keep);
    sigma = model_view.singular_values.head(keep);
  }
  a.mspc = mspc_chart(a.decomposition.residuals, scores, sigma, config.percentile);

  const std::size_t max_lag = std::min<std::size_t>(config.acf_max_lag, static_cast<std::size_t>(x.rows() - 1));
  try {
    a.acf = sample_acf(std::span<const double>(a.mspc.q.data(), a.mspc.q.size()), max_lag);
  } catch (const Error& e) {
    a.warnings.push_back(std::string("ACF of the Q-statistic skipped: ") + e.what());
  }
  for (const auto& cf : coded) {
    a.dispersion[cf.spec.name] = residual_dispersion(a.decomposition.residuals, cf.level_names);
  }
  for (const auto& w : a.anova.warnings) a.warnings.push_back(w);
  return a;
}

std::vector<std::string> emit_plots(const PipelineArtifacts& a, const PipelineConfig& config,
                                    const fs::path& plot_dir) {
  std::vector<std::string> files;
  fs::create_directories(plot_dir);
  auto put = [&](const std::string& name, const std::string& svg) {
    write_file(plot_dir / name, svg);
    files.push_back(name);
  };
  std::vector<std::string> col_names;
  for (const auto& l : a.table.col_labels) col_names.push_back(join_label(l));
  std::vector<std::string> row_names;
  for (const auto& l : a.table.row_labels) row_names.push_back(join_label(l));

  for (const auto& view : a.views) {
    const auto stem = term_file_stem(view.term);
    const Eigen::Index r = view.components();
    if (config.plot.scores) {
      std::vector<svg::Point> points;
      for (Eigen::Index i = 0; r > 0 && i < view.scores_augmented.rows(); ++i) {
        const double sx = r > 1 ? view.scores_augmented(i, 0) : static_cast<double>(i);
        const double sy = r > 1 ? view.scores_augmented(i, 1) : view.scores_augmented(i, 0);
        points.push_back({row_names[static_cast<std::size_t>(i)], sx, sy});
      }
      put("scores_" + stem + ".svg",
          svg::scatter_plot("Scores: " + view.term, r > 1 ? "PC1" : "observation", r > 1 ? "PC2" : "PC1", points));
    }
    if (config.plot.loadings) {
      std::vector<double> pc1;
      for (Eigen::Index j = 0; r > 0 && j < view.loadings.rows(); ++j) pc1.push_back(view.loadings(j, 0));
      put("loadings_" + stem + ".svg", svg::loading_plot("Loadings PC1: " + view.term,
                                                         r > 0 ? col_names : std::vector<std::string>{}, pc1));
    }
    if (config.plot.biplot && r > 0) {
      const auto plot = biplot_coords(view, 0, r > 1 ? 1 : 0, a.term_row_groups.at(view.term), col_names);
      put("biplot_" + stem + ".svg", svg::biplot("Biplot: " + view.term, plot));
    }
  }
  if (config.plot.mspc) put("mspc.svg", svg::mspc_plot("MSPC chart", a.mspc, row_names));
  if (config.plot.acf && !a.acf.empty()) {
    put("acf.svg", svg::acf_plot("ACF of the Q-statistic", a.acf, static_cast<std::size_t>(a.mspc.q.size())));
  }
  if (config.plot.boxplot) {
    for (const auto& [factor, boxes] : a.dispersion) {
      put("boxplot_" + term_file_stem(factor) + ".svg", svg::box_plot("Residuals by " + factor, boxes));
    }
  }
  return files;
}

std::vector<std::string> write_artifacts(const PipelineArtifacts& a, const PipelineConfig& config,
                                         const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    files.push_back(name);
  };

  {
    std::ostringstream csv;
    write_table_csv(a.anova, csv);
    put("table.csv", csv.str());
    std::ostringstream txt;
    write_table_text(a.anova, txt);
    put("table.txt", txt.str());
  }

  const std::string row_header = label_header(a.table.row_modes);
  const std::string col_header = label_header(a.table.col_modes);
  std::ostringstream explained;
  explained << "term,component,singular_value,explained_fraction\n";
  for (const auto& view : a.views) {
    const auto stem = term_file_stem(view.term);
    const Eigen::Index r = view.components();
    std::ostringstream scores;
    scores << row_header;
    for (Eigen::Index c = 0; c < r; ++c) scores << "effect_PC" << c + 1 << ',';
    for (Eigen::Index c = 0; c < r; ++c) scores << "augmented_PC" << c + 1 << (c + 1 < r ? "," : "");
    scores << '\n';
    for (Eigen::Index i = 0; i < view.scores_effect.rows(); ++i) {
      scores << label_fields(a.table.row_labels[static_cast<std::size_t>(i)]);
      for (Eigen::Index c = 0; c < r; ++c) scores << fmt(view.scores_effect(i, c)) << ',';
      for (Eigen::Index c = 0; c < r; ++c) scores << fmt(view.scores_augmented(i, c)) << (c + 1 < r ? "," : "");
      scores << '\n';
    }
    put("scores_" + stem + ".csv", scores.str());

    std::ostringstream loadings;
    loadings << col_header;
    for (Eigen::Index c = 0; c < r; ++c) loadings << "PC" << c + 1 << (c + 1 < r ? "," : "");
    loadings << '\n';
    for (Eigen::Index j = 0; j < view.loadings.rows(); ++j) {
      loadings << label_fields(a.table.col_labels[static_cast<std::size_t>(j)]);
      for (Eigen::Index c = 0; c < r; ++c) loadings << fmt(view.loadings(j, c)) << (c + 1 < r ? "," : "");
      loadings << '\n';
    }
    put("loadings_" + stem + ".csv", loadings.str());
    for (Eigen::Index c = 0; c < r; ++c) {
      explained << csv_field(view.term) << ',' << c + 1 << ',' << fmt(view.singular_values(c)) << ','
                << fmt(view.explained_fraction(c)) << '\n';
    }
  }
  put("explained.csv", explained.str());

  if (config.dump_null) {
    for (const auto& r : a.permutations) {
      std::ostringstream null;
      write_null_distribution(std::span(&r, 1), null);
      put("null_" + term_file_stem(r.term) + ".csv", null.str());
    }
  }

  std::ostringstream mspc;
  mspc << row_header << "Q,D\n";
  for (Eigen::Index i = 0; i < a.mspc.q.size(); ++i) {
    mspc << label_fields(a.table.row_labels[static_cast<std::size_t>(i)]) << fmt(a.mspc.q(i)) << ','
         << fmt(a.mspc.d(i)) << '\n';
  }
  put("mspc.csv", mspc.str());
  put("limits.csv", "statistic,percentile,limit\nQ," + fmt(a.mspc.percentile) + "," + fmt(a.mspc.q_limit) +
                        "\nD," + fmt(a.mspc.percentile) + "," + fmt(a.mspc.d_limit) + "\n");

  std::ostringstream acf;
  acf << "lag,acf\n";
  for (std::size_t k = 0; k < a.acf.size(); ++k) acf << k << ',' << fmt(a.acf[k]) << '\n';
  put("acf.csv", acf.str());

  for (const auto& [factor, boxes] : a.dispersion) {
    std::ostringstream out;
    out << "level,count,whisker_low,q1,median,q3,whisker_high,outliers\n";
    for (const auto& b : boxes) {
      out << csv_field(b.level) << ',' << b.count << ',' << fmt(b.whisker_low) << ',' << fmt(b.q1) << ','
          << fmt(b.median) << ',' << fmt(b.q3) << ',' << fmt(b.whisker_high) << ',' << b.outliers.size() << '\n';
    }
    put("dispersion_" + term_file_stem(factor) + ".csv", out.str());
  }

  {
    std::ostringstream report;
    write_preprocess_report(a.exclusion, a.imputed, a.cells_before_imputation, a.scaling,
                            config.scaling == Scaling::Autoscale ? "autoscale" : "center", report);
    report << "records read: " << a.build.records << '\n';
    for (const auto& w : a.warnings) report << "warning: " << w << '\n';
    put("preprocess.txt", report.str());
  }

  if (config.plots) {
    for (const auto& f : emit_plots(a, config, dir / "plots")) files.push_back("plots/" + f);
  }

  std::sort(files.begin(), files.end());
  std::ostringstream manifest;
  manifest << "tool: asca " << version() << '\n'
           << "config_hash: fnv1a64:" << config.source_hash << '\n'
           << "input_hash: fnv1a64:" << fnv1a64_hex(read_file(config.input)) << '\n'
           << "seed: " << config.seed.value_or(0) << '\n'
           << "permutations: " << config.permutations << '\n'
           << "rng: " << kPermutationRng << '\n'
           << "reference: " << config.reference << '\n'
           << "observations: " << a.table.rows() << '\n'
           << "variables: " << a.table.cols() << '\n'
           << "excluded_rows: " << a.exclusion.excluded.size() << '\n'
           << "imputed_cells: " << a.imputed << '\n'
           << "files:\n";
  for (const auto& f : files) manifest << "  " << f << '\n';
  put("manifest.txt", manifest.str());
  std::sort(files.begin(), files.end());
  return files;
}

RunResult run(const PipelineConfig& config, const RunOptions& options) {
  RunResult result;
  const auto violations = validate(config);
  if (!violations.empty()) {
    result.exit_code = kExitConfigError;
    for (const auto& v : violations) result.messages.push_back(v.field + ": " + v.message);
    return result;
  }
  const fs::path out_dir = config.output_dir;
  std::error_code ec;
  if (fs::exists(out_dir) && !fs::is_empty(out_dir, ec) && !fs::exists(out_dir / "manifest.txt")) {
    result.exit_code = kExitConfigError;
    result.messages.push_back("output.directory: '" + out_dir.string() +
                              "' is not empty and holds no previous run; refusing to overwrite");
    return result;
  }

  PipelineConfig effective = config;
  if (options.workers) effective.workers = *options.workers;
  fs::path staging = out_dir;
  staging += ".partial";
  try {
    const auto artifacts = analyze(effective);
    fs::remove_all(staging);
    result.files = write_artifacts(artifacts, effective, staging);
    fs::remove_all(out_dir);
    fs::rename(staging, out_dir);
    for (const auto& w : artifacts.warnings) result.messages.push_back("warning: " + w);
  } catch (const Error& e) {
    fs::remove_all(staging, ec);
    result.exit_code = kExitDataError;
    result.messages.push_back(e.what());
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    result.exit_code = kExitDataError;
    result.messages.push_back(std::string("IoError: ") + e.what());
  }
  return result;
}

}  // namespace asca
