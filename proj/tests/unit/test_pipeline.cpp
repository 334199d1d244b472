#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "asca/config.hpp"
#include "asca/pipeline.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace asca;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig load_ok(const std::string& text, const fs::path& dir) {
  auto l = load_config(text, dir);
  for (const auto& v : l.violations) FAIL_CHECK(v.field << ": " << v.message);
  REQUIRE(l.violations.empty());
  const auto violations = validate(l.config);
  for (const auto& v : violations) FAIL_CHECK(v.field << ": " << v.message);
  REQUIRE(violations.empty());
  return l.config;
}

// Three sites, four days, hourly: rows site x day, columns hour.
void write_sites(const fs::path& path, bool duplicate = false) {
  std::ofstream out(path);
  out << "timestamp,series,value\n";
  char line[80];
  for (int s = 0; s < 3; ++s) {
    for (int d = 1; d <= 4; ++d) {
      for (int h = 0; h < 24; ++h) {
        std::snprintf(line, sizeof line, "2022-06-%02d %02d:00,site%d,%.3f\n", d, h, s, s * 0.7 + h * 0.1 + ((d * 7 + h * 3) % 5) * 0.2);
        out << line;
      }
    }
  }
  if (duplicate) out << "2022-06-01 00:00,site0,1.0\n";
}

const char* kSites = R"([input]
path = sites.csv
series_mode = site

[mode site]
kind = non_temporal

[mode day]
kind = evolution
frequency = day
period = span
cardinality = 4

[mode hour]
kind = cyclostationary
frequency = hour
period = day
cardinality = 24

[unfold]
rows = site, day
columns = hour

[preprocess]
scaling = center

[factor site]
kind = nominal

[model]
permutations = 99
seed = 3

[output]
directory = out
)";

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir).generic_string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("minimal pipeline: one nominal factor") {
  const auto dir = support::scratch_dir("minimal");
  write_sites(dir / "sites.csv");
  const auto cfg = load_ok(kSites, dir);
  const auto result = run(cfg);
  for (const auto& m : result.messages) MESSAGE(m);
  REQUIRE(result.exit_code == kExitOk);
  const auto rows = [&] {
    std::ifstream in(dir / "out" / "table.csv");
    return read_table_csv(in);
  }();
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].term == "site");
  CHECK(rows[0].df == 2);
  CHECK(rows[1].term == "residuals");
  CHECK(rows[1].df == 9);
  CHECK(rows[2].df == 11);
  REQUIRE(rows[0].p);
  CHECK(*rows[0].p >= 0.01);
  for (const char* f : {"table.csv", "table.txt", "scores_site.csv", "loadings_site.csv", "mspc.csv", "acf.csv",
                        "limits.csv", "explained.csv", "manifest.txt", "preprocess.txt", "plots/biplot_site.svg",
                        "plots/mspc.svg", "plots/acf.svg", "plots/scores_site.svg", "plots/loadings_site.svg",
                        "plots/boxplot_site.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / "out" / f));
  }
  CHECK_FALSE(fs::exists(dir / "out" / "null_site.csv"));
  CHECK(result.files == listing(dir / "out"));

  const auto manifest = slurp(dir / "out" / "manifest.txt");
  CHECK(manifest.find("config_hash: fnv1a64:" + cfg.source_hash) != std::string::npos);
  CHECK(manifest.find("seed: 3\n") != std::string::npos);
  CHECK(manifest.find("permutations: 99\n") != std::string::npos);
  CHECK(manifest.find("tool: asca " + version()) != std::string::npos);

  const auto scores = slurp(dir / "out" / "scores_site.csv");
  CHECK(scores.rfind("site,day,effect_PC1,effect_PC2,augmented_PC1,augmented_PC2\nsite0,2022-06-01,", 0) == 0);
}

TEST_CASE("lakes-shaped run reproduces the degrees of freedom") {
  const auto dir = support::scratch_dir("lakes");
  support::LakesShape shape;
  shape.sub_daily = false;
  support::write_lakes_csv(dir / "lakes.csv", shape);
  const auto cfg = load_ok(support::lakes_config("lakes.csv", "out", false, 49), dir);
  const auto a = analyze(cfg);
  CHECK(a.table.rows() == 64);
  CHECK(a.table.cols() == 365);
  CHECK(a.exclusion.excluded.size() == 20);
  CHECK(a.imputed > 0);
  CHECK(a.build.leap_day_records_dropped > 0);
  CHECK(a.anova.row("year").df == 1);
  CHECK(a.anova.row("sensor").df == 6);
  CHECK(a.anova.row("year:sensor").df == 6);
  CHECK(a.anova.residual.df == 50);
  CHECK(a.anova.total.df == 63);
  // Unbalanced after exclusion, so the parts need not add up to the total.
  CHECK(a.anova.total.pct_ss != doctest::Approx(100.0).epsilon(1e-9));
  CHECK(*a.anova.row("sensor").p == doctest::Approx(0.02));
  CHECK(a.views.size() == 3);
  CHECK(a.views[0].components() == 1);  // ordinal year: rank 1
  CHECK(a.views[1].components() == 2);

  const auto files = write_artifacts(a, cfg, dir / "out");
  CHECK(std::count(files.begin(), files.end(), "null_year_x_sensor.csv") == 1);
  std::istringstream null(slurp(dir / "out" / "null_sensor.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(null, line)) ++lines;
  CHECK(lines == 50);
  const auto pre = slurp(dir / "out" / "preprocess.txt");
  CHECK(pre.find("excluded rows: 20") != std::string::npos);
}

TEST_CASE("pollen-shaped run reproduces the degrees of freedom") {
  const auto dir = support::scratch_dir("pollen");
  support::write_pollen_csv(dir / "pollen.csv");
  const auto cfg = load_ok(support::pollen_config("pollen.csv", "out", 19), dir);
  const auto a = analyze(cfg);
  CHECK(a.table.rows() == 754);
  CHECK(a.table.cols() == 44);
  CHECK(a.anova.row("year").df == 1);
  CHECK(a.anova.row("fortnight").df == 25);
  CHECK(a.anova.row("year:fortnight").df == 25);
  CHECK(a.anova.residual.df == 702);
  CHECK(a.anova.total.df == 753);
  CHECK(a.table.matrix.squaredNorm() == doctest::Approx(44.0 * 753.0).epsilon(1e-9));
  // Fortnight biplot: one score point per fortnight, one loading per taxon.
  const auto& view = a.views[1];
  std::vector<std::string> cols;
  for (const auto& l : a.table.col_labels) cols.push_back(join_label(l));
  const auto plot = biplot_coords(view, 0, 1, a.term_row_groups.at("fortnight"), cols);
  CHECK(plot.scores.size() == 26);
  CHECK(plot.loadings.size() == 44);
}

TEST_CASE("artifacts are byte-identical across runs and worker counts") {
  const auto dir = support::scratch_dir("determinism");
  support::LakesShape shape;
  shape.sub_daily = false;
  support::write_lakes_csv(dir / "lakes.csv", shape);
  auto cfg = load_ok(support::lakes_config("lakes.csv", "out", false, 199), dir);
  std::vector<std::vector<std::string>> runs;
  for (unsigned workers : {1u, 1u, 2u, 5u}) {
    cfg.output_dir = dir / ("out" + std::to_string(runs.size()));
    RunOptions o;
    o.workers = workers;
    REQUIRE(run(cfg, o).exit_code == kExitOk);
    runs.push_back(listing(cfg.output_dir));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    REQUIRE(runs[r] == runs[0]);
    for (const auto& f : runs[0]) {
      CAPTURE(f);
      CHECK(slurp(dir / ("out" + std::to_string(r)) / f) == slurp(dir / "out0" / f));
    }
  }
}

TEST_CASE("biplot SVG agrees with the exported view") {
  const auto dir = support::scratch_dir("biplot");
  write_sites(dir / "sites.csv");
  const auto cfg = load_ok(kSites, dir);
  const auto a = analyze(cfg);
  write_artifacts(a, cfg, dir / "out");
  const auto svg = slurp(dir / "out" / "plots" / "biplot_site.svg");
  std::vector<std::string> cols;
  for (const auto& l : a.table.col_labels) cols.push_back(join_label(l));
  const auto plot = biplot_coords(a.views[0], 0, 1, a.term_row_groups.at("site"), cols);
  const std::regex scale_re("data-scale=\"([^\"]+)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, scale_re));
  CHECK(std::stod(m[1]) == doctest::Approx(plot.scale).epsilon(1e-5));
  const std::regex marker(R"re(<circle class="(score|loading)" data-label="([^"]*)")re");
  std::size_t n_scores = 0, n_loadings = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), marker), end; it != end; ++it) {
    ((*it)[1] == "score" ? n_scores : n_loadings)++;
  }
  CHECK(n_scores == 3);
  CHECK(n_loadings == 24);
}

TEST_CASE("failed runs leave no output behind") {
  const auto dir = support::scratch_dir("failure");
  write_sites(dir / "sites.csv", true);
  const auto cfg = load_ok(kSites, dir);
  const auto r = run(cfg);
  CHECK(r.exit_code == kExitDataError);
  REQUIRE_FALSE(r.messages.empty());
  CHECK(r.messages[0].find("DuplicateCell") == 0);
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK_FALSE(fs::exists(dir / "out.partial"));

  auto bad = cfg;
  bad.permutations = 0;
  CHECK(run(bad).exit_code == kExitConfigError);

  // A previous run's directory is replaced; an unrelated one is left alone.
  write_sites(dir / "sites.csv");
  REQUIRE(run(cfg).exit_code == kExitOk);
  REQUIRE(run(cfg).exit_code == kExitOk);
  auto other = cfg;
  other.output_dir = dir / "precious";
  fs::create_directories(other.output_dir);
  std::ofstream(other.output_dir / "notes.txt") << "keep";
  CHECK(run(other).exit_code == kExitConfigError);
  CHECK(fs::exists(other.output_dir / "notes.txt"));
}

TEST_CASE("command line exit codes") {
  const auto dir = support::scratch_dir("cli");
  write_sites(dir / "sites.csv");
  std::ofstream(dir / "good.ini") << kSites;
  std::ofstream(dir / "bad.ini") << "[model]\npermutations = 0\n";
  const std::string cli = ASCA_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((cli + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("version") == 0);
  CHECK(status("validate " + (dir / "good.ini").string()) == 0);
  CHECK(status("validate " + (dir / "bad.ini").string()) == 2);
  CHECK(slurp(dir / "log.txt").find("model.permutations") != std::string::npos);
  CHECK(status("run " + (dir / "good.ini").string() + " --workers 2") == 0);
  CHECK(fs::exists(dir / "out" / "table.csv"));
  CHECK(status("frobnicate") == 2);
  CHECK(status("run") == 2);
}
