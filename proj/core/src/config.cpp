#include "asca/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "asca/error.hpp"

namespace asca {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(const std::string& value, char sep = ',') {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, sep)) {
    auto t = trim(item);
    if (!t.empty()) items.push_back(std::move(t));
  }
  return items;
}

template <typename T>
bool parse_integer(const std::string& text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_double(const std::string& text, double& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::optional<bool> parse_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  return std::nullopt;
}

class Reader {
 public:
  Reader(const ConfigSection& section, std::vector<Violation>& violations)
      : section_(section), violations_(violations) {
    for (const auto& [key, value] : section.entries) {
      if (!seen_.insert(key).second) fail(key, "duplicate key");
    }
  }

  std::string field(std::string_view key) const {
    std::string f = section_.kind;
    if (!section_.name.empty()) f += "." + section_.name;
    return f + "." + std::string(key);
  }

  void fail(std::string_view key, const std::string& message) const {
    violations_.push_back({field(key), message});
  }

  const std::string* get(std::string_view key) {
    used_.insert(std::string(key));
    return section_.find(key);
  }

  template <typename T>
  void integer(std::string_view key, T& out) {
    if (const auto* v = get(key)) {
      if (!parse_integer(*v, out)) fail(key, "expected an integer, got '" + *v + "'");
    }
  }

  template <typename T>
  void integer(std::string_view key, std::optional<T>& out) {
    if (const auto* v = get(key)) {
      T value{};
      if (parse_integer(*v, value)) out = value;
      else fail(key, "expected an integer, got '" + *v + "'");
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const auto* v = get(key)) {
      if (auto b = parse_bool(*v)) out = *b;
      else fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  // Flags keys that no reader asked for.
  void finish() const {
    for (const auto& [key, value] : section_.entries) {
      if (!used_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  const ConfigSection& section_;
  std::vector<Violation>& violations_;
  std::set<std::string> seen_;
  std::set<std::string> used_;
};

}  // namespace

const std::string* ConfigSection::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::vector<ConfigSection> parse_config_document(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::stringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": unterminated section header");
      }
      const std::string header = trim(std::string_view(line).substr(1, line.size() - 2));
      ConfigSection section;
      section.line = line_no;
      const auto space = header.find_first_of(" \t");
      section.kind = header.substr(0, space);
      if (space != std::string::npos) section.name = trim(std::string_view(header).substr(space));
      if (section.kind.empty()) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": empty section header");
      }
      sections.push_back(std::move(section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (sections.empty()) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": entry outside a section");
    }
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": empty key");
    sections.back().entries.emplace_back(std::move(key), std::move(value));
  }
  return sections;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ConfigLoad load_config(const std::string& text, const std::filesystem::path& base_dir) {
  ConfigLoad load;
  auto& cfg = load.config;
  auto& violations = load.violations;
  cfg.source_hash = fnv1a64_hex(text);

  std::vector<ConfigSection> sections;
  try {
    sections = parse_config_document(text);
  } catch (const Error& e) {
    violations.push_back({"document", e.what()});
    return load;
  }

  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  std::set<std::string> singletons;
  bool has_model = false;
  for (const auto& section : sections) {
    const std::string& kind = section.kind;
    const bool named = kind == "mode" || kind == "aggregate" || kind == "factor";
    if (named && section.name.empty()) {
      violations.push_back({kind, "section [" + kind + "] needs a name"});
      continue;
    }
    if (!named && !section.name.empty()) {
      violations.push_back({kind, "section [" + kind + "] takes no name"});
    }
    if (!named && !singletons.insert(kind).second) {
      violations.push_back({kind, "section [" + kind + "] appears twice"});
      continue;
    }
    Reader r(section, violations);
    if (kind == "input") {
      if (const auto* v = r.get("path")) cfg.input = resolve(*v);
      if (const auto* v = r.get("series_mode")) cfg.series_mode = *v;
      if (const auto* v = r.get("series_levels")) cfg.series_levels = split_list(*v);
      if (const auto* v = r.get("origin")) {
        try {
          cfg.origin = parse_timestamp(*v);
        } catch (const Error& e) {
          r.fail("origin", e.what());
        }
      }
      r.integer("year_start_day", cfg.year_start_day);
    } else if (kind == "mode") {
      CalendarModeSpec mode;
      mode.name = section.name;
      if (const auto* v = r.get("kind")) {
        if (auto k = parse_mode_kind(*v)) mode.kind = *k;
        else r.fail("kind", "expected cyclostationary, evolution or non_temporal, got '" + *v + "'");
      } else {
        r.fail("kind", "missing");
      }
      if (const auto* v = r.get("frequency")) mode.frequency_unit = *v;
      if (const auto* v = r.get("period")) mode.period_unit = *v;
      mode.cardinality = 0;
      r.integer("cardinality", mode.cardinality);
      cfg.modes.push_back(std::move(mode));
    } else if (kind == "aggregate") {
      AggregateDirective agg;
      agg.mode = section.name;
      if (!r.get("block")) r.fail("block", "missing");
      r.integer("block", agg.block);
      r.boolean("absorb_remainder", agg.absorb_remainder);
      if (const auto* v = r.get("rename")) agg.rename = *v;
      cfg.aggregations.push_back(std::move(agg));
    } else if (kind == "unfold") {
      if (const auto* v = r.get("rows")) cfg.row_modes = split_list(*v);
      if (const auto* v = r.get("columns")) cfg.col_modes = split_list(*v);
    } else if (kind == "preprocess") {
      r.integer("exclude_threshold", cfg.exclude_threshold);
      if (const auto* v = r.get("scaling")) {
        if (*v == "center") cfg.scaling = Scaling::Center;
        else if (*v == "autoscale") cfg.scaling = Scaling::Autoscale;
        else r.fail("scaling", "expected center or autoscale, got '" + *v + "'");
      }
    } else if (kind == "factor") {
      FactorDecl f;
      f.name = section.name;
      if (const auto* v = r.get("kind")) {
        if (*v == "nominal") f.kind = FactorKind::Nominal;
        else if (*v == "ordinal") f.kind = FactorKind::Ordinal;
        else r.fail("kind", "expected nominal or ordinal, got '" + *v + "'");
      }
      if (const auto* v = r.get("nested_in")) f.nested_in = *v;
      cfg.factors.push_back(std::move(f));
    } else if (kind == "interaction") {
      if (const auto* v = r.get("terms")) {
        for (const auto& item : split_list(*v)) {
          const auto parts = split_list(item, ':');
          if (parts.size() != 2) r.fail("terms", "expected 'a:b', got '" + item + "'");
          else cfg.interactions.emplace_back(parts[0], parts[1]);
        }
      }
    } else if (kind == "model") {
      has_model = true;
      if (!r.get("permutations")) r.fail("permutations", "missing");
      r.integer("permutations", cfg.permutations);
      r.integer("seed", cfg.seed);
      if (const auto* v = r.get("reference")) cfg.reference = *v;
      r.integer("components", cfg.components);
      r.integer("workers", cfg.workers);
      if (const auto* v = r.get("percentile")) {
        if (!parse_double(*v, cfg.percentile)) r.fail("percentile", "expected a number");
      }
      r.integer("acf_max_lag", cfg.acf_max_lag);
      r.boolean("dump_null", cfg.dump_null);
    } else if (kind == "output") {
      if (const auto* v = r.get("directory")) cfg.output_dir = resolve(*v);
      r.boolean("plots", cfg.plots);
      r.boolean("scores", cfg.plot.scores);
      r.boolean("loadings", cfg.plot.loadings);
      r.boolean("biplot", cfg.plot.biplot);
      r.boolean("mspc", cfg.plot.mspc);
      r.boolean("acf", cfg.plot.acf);
      r.boolean("boxplot", cfg.plot.boxplot);
    } else {
      violations.push_back({kind, "unknown section [" + kind + "]"});
      continue;
    }
    r.finish();
  }
  if (!has_model) violations.push_back({"model", "section [model] is required"});
  return load;
}

ConfigLoad load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigLoad load;
    load.violations.push_back({"document", "cannot read '" + path.string() + "'"});
    return load;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_config(buffer.str(), path.parent_path());
}

std::vector<Violation> validate(const PipelineConfig& cfg) {
  std::vector<Violation> v;
  auto add = [&v](std::string field, std::string message) { v.push_back({std::move(field), std::move(message)}); };

  if (cfg.input.empty()) add("input.path", "missing");
  else if (!std::filesystem::is_regular_file(cfg.input)) add("input.path", "no such file '" + cfg.input.string() + "'");

  // Modes as they exist after aggregation, for the unfolding checks.
  std::map<std::string, CalendarModeSpec> modes;
  std::size_t evolution = 0;
  if (cfg.modes.empty()) add("mode", "at least one [mode] section is required");
  for (const auto& mode : cfg.modes) {
    const std::string field = "mode." + mode.name;
    if (modes.count(mode.name)) add(field, "declared twice");
    modes[mode.name] = mode;
    if (mode.kind == ModeKind::Evolution) ++evolution;
    if (mode.kind == ModeKind::NonTemporal) {
      if (!cfg.series_mode || *cfg.series_mode != mode.name) {
        add(field, "a non-temporal mode must be named as input.series_mode");
      }
      if (!cfg.series_levels.empty() && mode.cardinality != 0 && mode.cardinality != cfg.series_levels.size()) {
        add(field + ".cardinality", "does not match the number of input.series_levels");
      }
      continue;
    }
    try {
      validate_mode(mode);
    } catch (const Error& e) {
      add(field, e.what());
    }
  }
  if (evolution > 1) add("mode", "at most one mode may have kind = evolution");
  if (cfg.series_mode) {
    auto it = modes.find(*cfg.series_mode);
    if (it == modes.end() || it->second.kind != ModeKind::NonTemporal) {
      add("input.series_mode", "must name a declared non_temporal mode");
    }
  }
  if (cfg.year_start_day < 0 || cfg.year_start_day > 364) add("input.year_start_day", "must be in [0, 364]");

  for (const auto& agg : cfg.aggregations) {
    const std::string field = "aggregate." + agg.mode;
    auto it = modes.find(agg.mode);
    if (it == modes.end()) {
      add(field, "unknown mode");
      continue;
    }
    auto mode = it->second;
    if (agg.block < 1) add(field + ".block", "must be >= 1");
    else if (mode.cardinality != 0 && agg.block > mode.cardinality) add(field + ".block", "larger than the mode cardinality");
    else if (!agg.absorb_remainder && mode.cardinality % agg.block != 0) {
      add(field + ".block", "does not divide the cardinality; set absorb_remainder = true");
    }
    modes.erase(it);
    if (agg.block >= 1) mode.cardinality /= agg.block;
    mode.name = agg.rename.value_or(agg.mode);
    if (modes.count(mode.name)) add(field + ".rename", "clashes with an existing mode");
    modes[mode.name] = mode;
  }

  std::set<std::string> assigned;
  if (cfg.col_modes.empty()) {
    add("unfold.columns", "no column modes; an unfolding needs at least one mode on the columns");
  }
  for (const auto* list : {&cfg.row_modes, &cfg.col_modes}) {
    const bool columns = list == &cfg.col_modes;
    const std::string field = columns ? "unfold.columns" : "unfold.rows";
    for (const auto& name : *list) {
      auto it = modes.find(name);
      if (it == modes.end()) add(field, "unknown mode '" + name + "'");
      else if (columns && it->second.kind == ModeKind::Evolution) {
        add(field, "'" + name + "' is the evolution mode and can only be a row mode");
      }
      if (!assigned.insert(name).second) add(field, "mode '" + name + "' assigned twice");
    }
  }
  for (const auto& [name, mode] : modes) {
    if (!assigned.count(name)) add("unfold", "mode '" + name + "' is assigned to neither rows nor columns");
  }

  if (!cfg.scaling) add("preprocess.scaling", "exactly one of center or autoscale is required");

  std::set<std::string> factor_names;
  std::set<std::string> row_set(cfg.row_modes.begin(), cfg.row_modes.end());
  if (cfg.factors.empty()) add("factor", "at least one [factor] section is required");
  for (const auto& f : cfg.factors) {
    const std::string field = "factor." + f.name;
    if (!factor_names.insert(f.name).second) add(field, "declared twice");
    if (!row_set.count(f.name)) add(field, "factors must be row modes of the unfolding");
  }
  for (const auto& f : cfg.factors) {
    if (!f.nested_in) continue;
    const std::string field = "factor." + f.name + ".nested_in";
    if (*f.nested_in == f.name) add(field, "a factor cannot be nested in itself");
    else if (!factor_names.count(*f.nested_in)) add(field, "unknown factor '" + *f.nested_in + "'");
    if (f.kind == FactorKind::Ordinal) add(field, "nested factors are coded nominally; drop kind = ordinal");
  }
  std::set<std::string> terms(factor_names);
  for (const auto& [a, b] : cfg.interactions) {
    const std::string name = interaction_name(a, b);
    const std::string field = "interaction.terms";
    if (!factor_names.count(a) || !factor_names.count(b)) {
      add(field, "'" + name + "' refers to an undeclared factor");
      continue;
    }
    if (a == b) add(field, "'" + name + "' pairs a factor with itself");
    for (const auto& f : cfg.factors) {
      if ((f.name == a && f.nested_in == b) || (f.name == b && f.nested_in == a)) {
        add(field, "'" + name +
                       "' pairs a nested factor with its parent; that interaction is already part of the nested term");
      }
    }
    if (!terms.insert(name).second) add(field, "'" + name + "' declared twice");
  }

  if (cfg.permutations < 1) add("model.permutations", "must be >= 1");
  if (!cfg.seed) add("model.seed", "missing; runs must be reproducible");
  if (cfg.reference != "residuals" && !terms.count(cfg.reference)) {
    add("model.reference", "must be 'residuals' or a model term");
  }
  if (cfg.components < 1) add("model.components", "must be >= 1");
  if (cfg.workers < 1) add("model.workers", "must be >= 1");
  if (!(cfg.percentile > 0.0 && cfg.percentile < 100.0)) add("model.percentile", "must lie in (0, 100)");
  if (cfg.output_dir.empty()) add("output.directory", "missing");
  return v;
}

}  // namespace asca
