#include "asca/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "asca/error.hpp"

namespace asca {
namespace {

constexpr std::int64_t kWeekSeconds = 7 * kSecondsPerDay;
constexpr std::int64_t kYearSeconds = kDaysPerYear * kSecondsPerDay;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void invalid_mode(const CalendarModeSpec& mode, const std::string& why) {
  throw Error(ErrorCode::InvalidMode, "mode '" + mode.name + "': " + why);
}

// Maps a timestamp to a level of one temporal mode.
class ModeMapper {
 public:
  ModeMapper(const CalendarModeSpec& mode, std::int64_t origin_seconds, int year_start_day)
      : cardinality_(static_cast<std::int64_t>(mode.cardinality)),
        frequency_(*unit_seconds(mode.frequency_unit)),
        span_(mode.period_unit == "span"),
        origin_(origin_seconds),
        year_start_day_(year_start_day) {
    if (!span_) period_ = *unit_seconds(mode.period_unit);
  }

  // Negative when the timestamp falls outside the mode's domain.
  std::int64_t level(const Timestamp& ts) const {
    const std::int64_t second_of_day = ts.hour * 3600 + ts.minute * 60 + ts.second;
    std::int64_t offset = 0;
    if (span_) {
      offset = noleap_seconds(ts) - origin_;
      if (offset < 0) return -1;
      const std::int64_t idx = offset / frequency_;
      return idx < cardinality_ ? idx : -1;
    }
    if (period_ == kWeekSeconds) {
      offset = weekday_index(ts) * kSecondsPerDay + second_of_day;
    } else if (period_ == kYearSeconds) {
      const int day = (day_of_year_noleap(ts) - year_start_day_ + 365) % 365;
      offset = day * kSecondsPerDay + second_of_day;
    } else {
      offset = ((noleap_seconds(ts) % period_) + period_) % period_;
    }
    return std::min(offset / frequency_, cardinality_ - 1);
  }

 private:
  std::int64_t cardinality_;
  std::int64_t frequency_;
  std::int64_t period_ = 0;
  bool span_;
  std::int64_t origin_;
  int year_start_day_;
};

std::vector<std::string> index_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
  return names;
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

std::string scaled_unit(std::string_view unit, std::size_t factor) {
  std::size_t digits = 0;
  while (digits < unit.size() && unit[digits] >= '0' && unit[digits] <= '9') ++digits;
  std::size_t multiplier = 1;
  if (digits > 0) std::from_chars(unit.data(), unit.data() + digits, multiplier);
  return std::to_string(multiplier * factor) + std::string(unit.substr(digits));
}

// Span levels are named after the start of their window: "2008" for yearly
// windows that start on Jan 1, a date for whole days, a full timestamp otherwise.
std::vector<std::string> span_names(const CalendarModeSpec& mode, std::int64_t origin) {
  const std::int64_t step = *unit_seconds(mode.frequency_unit);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < mode.cardinality; ++i) {
    const auto start = origin + static_cast<std::int64_t>(i) * step;
    const auto ts = from_noleap_seconds(start);
    std::string text = format_timestamp(ts);
    if (step % (kDaysPerYear * kSecondsPerDay) == 0 && ts.month == 1 && ts.day == 1 && start % kSecondsPerDay == 0) {
      text = std::to_string(ts.year);
    } else if (step % kSecondsPerDay == 0 && start % kSecondsPerDay == 0) {
      text = text.substr(0, 10);
    }
    names.push_back(std::move(text));
  }
  return names;
}

}  // namespace

std::string_view to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::Cyclostationary: return "cyclostationary";
    case ModeKind::Evolution: return "evolution";
    case ModeKind::NonTemporal: return "non_temporal";
  }
  return "unknown";
}

std::optional<ModeKind> parse_mode_kind(std::string_view text) {
  if (text == "cyclostationary") return ModeKind::Cyclostationary;
  if (text == "evolution") return ModeKind::Evolution;
  if (text == "non_temporal" || text == "non-temporal") return ModeKind::NonTemporal;
  return std::nullopt;
}

void validate_mode(const CalendarModeSpec& mode) {
  if (mode.name.empty()) throw Error(ErrorCode::InvalidMode, "mode with empty name");
  if (mode.kind == ModeKind::NonTemporal) return;
  if (mode.cardinality < 1) invalid_mode(mode, "cardinality must be >= 1");
  const auto frequency = unit_seconds(mode.frequency_unit);
  if (!frequency) invalid_mode(mode, "unknown frequency unit '" + mode.frequency_unit + "'");
  if (mode.period_unit == "span") return;
  const auto period = unit_seconds(mode.period_unit);
  if (!period) invalid_mode(mode, "unknown period unit '" + mode.period_unit + "'");
  if (*period != kWeekSeconds && *period != kYearSeconds && kSecondsPerDay % *period != 0) {
    invalid_mode(mode, "period must be a divisor of a day, a week or a year");
  }
  if (*frequency > *period) invalid_mode(mode, "frequency unit longer than period unit");
  const auto quotient = static_cast<std::size_t>(*period / *frequency);
  const bool exact = *period % *frequency == 0;
  if (!exact && *period != kYearSeconds) {
    invalid_mode(mode, "period is not a whole number of frequency units");
  }
  if (mode.cardinality != quotient) {
    invalid_mode(mode, "cardinality " + std::to_string(mode.cardinality) + " does not match " +
                           mode.period_unit + "/" + mode.frequency_unit + " = " +
                           std::to_string(quotient));
  }
}

void validate_modes(std::span<const CalendarModeSpec> modes) {
  std::set<std::string> names;
  std::size_t evolution = 0;
  for (const auto& mode : modes) {
    validate_mode(mode);
    if (!names.insert(mode.name).second) invalid_mode(mode, "duplicate mode name");
    if (mode.kind == ModeKind::Evolution) ++evolution;
  }
  if (evolution > 1) throw Error(ErrorCode::InvalidMode, "at most one evolution mode is allowed");
}

std::vector<Record> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty input");
  char delim = ',';
  for (char candidate : {',', ';', '\t'}) {
    if (line.find(candidate) != std::string::npos) {
      delim = candidate;
      break;
    }
  }
  auto split = [delim](std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = text.find(delim, start);
      fields.push_back(trim(text.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  };
  const auto header = split(line);
  if (header.size() != 3 || header[0] != "timestamp" || header[1] != "series" || header[2] != "value") {
    throw Error(ErrorCode::ParseError, "header must be 'timestamp,series,value'");
  }
  std::vector<Record> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 3) throw Error(ErrorCode::ParseError, where + "expected 3 fields");
    Record rec;
    try {
      rec.timestamp = parse_timestamp(fields[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
    rec.series = std::string(fields[1]);
    if (!fields[2].empty()) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), v);
      if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, where + "bad value '" + std::string(fields[2]) + "'");
      }
      rec.value = v;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

LabeledTensor::LabeledTensor(std::vector<CalendarModeSpec> modes,
                             std::vector<std::vector<std::string>> level_names,
                             std::vector<double> values,
                             std::vector<std::uint8_t> missing)
    : modes_(std::move(modes)),
      level_names_(std::move(level_names)),
      values_(std::move(values)),
      missing_(std::move(missing)) {
  std::size_t expected = 1;
  for (const auto& m : modes_) expected *= m.cardinality;
  if (values_.size() != expected || missing_.size() != expected) {
    throw Error(ErrorCode::ShapeMismatch, "tensor storage does not match the mode cardinalities");
  }
  if (level_names_.empty()) {
    for (const auto& m : modes_) level_names_.push_back(index_names(m.cardinality));
  }
  if (level_names_.size() != modes_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one level-name list per mode required");
  }
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (level_names_[i].size() != modes_[i].cardinality) {
      throw Error(ErrorCode::ShapeMismatch, "level names of mode '" + modes_[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (missing_[i]) {
      values_[i] = std::numeric_limits<double>::quiet_NaN();
    } else if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFiniteInput, "non-finite value outside the missing mask");
    }
  }
}

std::vector<std::size_t> LabeledTensor::shape() const {
  std::vector<std::size_t> s;
  s.reserve(modes_.size());
  for (const auto& m : modes_) s.push_back(m.cardinality);
  return s;
}

std::size_t LabeledTensor::mode_index(std::string_view name) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].name == name) return i;
  }
  throw Error(ErrorCode::UnknownMode, "no mode named '" + std::string(name) + "'");
}

std::size_t LabeledTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != modes_.size()) throw Error(ErrorCode::ShapeMismatch, "index rank");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (index[i] >= modes_[i].cardinality) throw Error(ErrorCode::LevelOutOfRange, "index");
    flat = flat * modes_[i].cardinality + index[i];
  }
  return flat;
}

LabeledTensor build_tensor(std::span<const Record> records,
                           std::vector<CalendarModeSpec> modes,
                           const CalendarOptions& options,
                           BuildReport* report) {
  std::optional<std::size_t> series_pos;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].kind != ModeKind::NonTemporal) continue;
    if (!options.series_mode || *options.series_mode != modes[i].name) {
      throw Error(ErrorCode::InvalidMode,
                  "non-temporal mode '" + modes[i].name + "' must be the series mode");
    }
    series_pos = i;
  }
  if (options.series_mode && !series_pos) {
    throw Error(ErrorCode::UnknownMode, "series mode '" + *options.series_mode + "' not declared");
  }

  std::vector<std::string> series_levels = options.series_levels;
  if (series_levels.empty()) {
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.series);
    series_levels.assign(ids.begin(), ids.end());
  }
  std::map<std::string, std::size_t, std::less<>> series_index;
  for (std::size_t i = 0; i < series_levels.size(); ++i) {
    if (!series_index.emplace(series_levels[i], i).second) {
      throw Error(ErrorCode::InvalidMode, "duplicate series level '" + series_levels[i] + "'");
    }
  }
  if (series_pos) {
    auto& mode = modes[*series_pos];
    if (mode.cardinality == 0) mode.cardinality = series_levels.size();
    if (mode.cardinality != series_levels.size()) {
      throw Error(ErrorCode::InvalidMode, "series mode '" + mode.name + "' declares " +
                                              std::to_string(mode.cardinality) + " levels but " +
                                              std::to_string(series_levels.size()) + " found");
    }
  }
  validate_modes(modes);

  std::int64_t origin = 0;
  if (options.origin) {
    origin = noleap_seconds(*options.origin);
  } else if (!records.empty()) {
    origin = std::numeric_limits<std::int64_t>::max();
    for (const auto& r : records) {
      if (!is_leap_day(r.timestamp)) origin = std::min(origin, noleap_seconds(r.timestamp));
    }
    origin -= origin % kSecondsPerDay;
  }

  std::vector<std::optional<ModeMapper>> mappers;
  for (const auto& mode : modes) {
    if (mode.kind == ModeKind::NonTemporal) mappers.emplace_back();
    else mappers.emplace_back(ModeMapper(mode, origin, options.year_start_day));
  }

  std::size_t total = 1;
  for (const auto& m : modes) total *= m.cardinality;
  std::vector<double> values(total, 0.0);
  std::vector<std::uint8_t> missing(total, 1);
  std::vector<std::uint8_t> seen(total, 0);

  BuildReport local;
  for (const auto& rec : records) {
    ++local.records;
    if (is_leap_day(rec.timestamp)) {
      ++local.leap_day_records_dropped;
      continue;
    }
    std::size_t flat = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      std::size_t level = 0;
      if (mappers[i]) {
        const auto l = mappers[i]->level(rec.timestamp);
        if (l < 0) {
          throw Error(ErrorCode::UnmappableTimestamp, format_timestamp(rec.timestamp) +
                                                          " is outside mode '" + modes[i].name + "'");
        }
        level = static_cast<std::size_t>(l);
      } else {
        const auto it = series_index.find(rec.series);
        if (it == series_index.end()) throw Error(ErrorCode::UnknownSeries, "series '" + rec.series + "'");
        level = it->second;
      }
      flat = flat * modes[i].cardinality + level;
    }
    if (!series_pos && !series_levels.empty() && rec.series != series_levels.front()) {
      throw Error(ErrorCode::UnknownSeries,
                  "several series ids but no series mode declared ('" + rec.series + "')");
    }
    if (seen[flat]) {
      throw Error(ErrorCode::DuplicateCell, "two records map to the cell of " +
                                                format_timestamp(rec.timestamp) + " series '" +
                                                rec.series + "'");
    }
    seen[flat] = 1;
    if (rec.value) {
      values[flat] = *rec.value;
      missing[flat] = 0;
    }
  }
  local.missing_cells = static_cast<std::size_t>(std::count(missing.begin(), missing.end(), 1));
  if (report) *report = local;

  std::vector<std::vector<std::string>> names;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (series_pos && *series_pos == i) names.push_back(series_levels);
    else if (modes[i].kind == ModeKind::Evolution && modes[i].period_unit == "span") {
      names.push_back(span_names(modes[i], origin));
    } else {
      names.push_back(index_names(modes[i].cardinality));
    }
  }
  return LabeledTensor(std::move(modes), std::move(names), std::move(values), std::move(missing));
}

std::string join_label(const LabelTuple& label, char sep) {
  std::string out;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (i) out += sep;
    out += label[i].name;
  }
  return out;
}

namespace {

struct AxisLayout {
  std::vector<std::size_t> offsets;  // flat-index contribution per row/column
  std::vector<LabelTuple> labels;
};

AxisLayout layout_axis(const LabeledTensor& tensor, std::span<const std::string> axis_modes,
                       const std::vector<std::size_t>& strides) {
  std::vector<std::size_t> positions;
  std::size_t count = 1;
  for (const auto& name : axis_modes) {
    positions.push_back(tensor.mode_index(name));
    count *= tensor.modes()[positions.back()].cardinality;
  }
  AxisLayout layout;
  layout.offsets.resize(count);
  layout.labels.resize(count);
  std::vector<std::size_t> idx(positions.size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t offset = 0;
    LabelTuple label;
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const auto p = positions[j];
      offset += idx[j] * strides[p];
      label.push_back({tensor.modes()[p].name, idx[j], tensor.level_names()[p][idx[j]]});
    }
    layout.offsets[k] = offset;
    layout.labels[k] = std::move(label);
    for (std::size_t j = positions.size(); j-- > 0;) {
      if (++idx[j] < tensor.modes()[positions[j]].cardinality) break;
      idx[j] = 0;
    }
  }
  return layout;
}

}  // namespace

DesignTable unfold(const LabeledTensor& tensor,
                   std::span<const std::string> row_modes,
                   std::span<const std::string> col_modes) {
  if (col_modes.empty()) {
    throw Error(ErrorCode::EmptyColumnModes, "at least one mode must be assigned to the columns");
  }
  std::set<std::string> used;
  for (const auto& name : row_modes) {
    tensor.mode_index(name);
    if (!used.insert(name).second) throw Error(ErrorCode::UnknownMode, "mode '" + name + "' listed twice");
  }
  for (const auto& name : col_modes) {
    const auto& mode = tensor.modes()[tensor.mode_index(name)];
    if (mode.kind == ModeKind::Evolution) {
      throw Error(ErrorCode::EvolutionModeInColumns, "evolution mode '" + name + "' must be in the rows");
    }
    if (!used.insert(name).second) throw Error(ErrorCode::UnknownMode, "mode '" + name + "' listed twice");
  }
  if (used.size() != tensor.modes().size()) {
    throw Error(ErrorCode::UnknownMode, "every mode must be assigned to rows or columns");
  }

  const auto strides = strides_of(tensor.shape());
  const auto rows = layout_axis(tensor, row_modes, strides);
  const auto cols = layout_axis(tensor, col_modes, strides);

  DesignTable table;
  const auto n = static_cast<Eigen::Index>(rows.offsets.size());
  const auto m = static_cast<Eigen::Index>(cols.offsets.size());
  table.matrix.resize(n, m);
  table.missing.resize(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto flat = rows.offsets[r] + cols.offsets[c];
      table.matrix(r, c) = tensor.value(flat);
      table.missing(r, c) = tensor.missing(flat);
    }
  }
  table.row_labels = rows.labels;
  table.col_labels = cols.labels;
  table.row_modes.assign(row_modes.begin(), row_modes.end());
  table.col_modes.assign(col_modes.begin(), col_modes.end());
  table.modes = tensor.modes();
  table.level_names = tensor.level_names();
  return table;
}

LabeledTensor fold(const DesignTable& table) {
  std::vector<std::size_t> shape;
  for (const auto& m : table.modes) shape.push_back(m.cardinality);
  const auto strides = strides_of(shape);
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  if (static_cast<std::size_t>(table.rows() * table.cols()) != total ||
      table.row_labels.size() != static_cast<std::size_t>(table.rows()) ||
      table.col_labels.size() != static_cast<std::size_t>(table.cols())) {
    throw Error(ErrorCode::ShapeMismatch, "fold requires the complete unfolding");
  }
  auto position = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.modes.size(); ++i) {
      if (table.modes[i].name == name) return i;
    }
    throw Error(ErrorCode::UnknownMode, name);
  };
  auto offset_of = [&](const LabelTuple& label) {
    std::size_t off = 0;
    for (const auto& l : label) off += l.level * strides[position(l.mode)];
    return off;
  };
  std::vector<double> values(total, 0.0);
  std::vector<std::uint8_t> missing(total, 1);
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const auto ro = offset_of(table.row_labels[r]);
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      const auto flat = ro + offset_of(table.col_labels[c]);
      missing[flat] = table.missing(r, c) ? 1 : 0;
      values[flat] = table.missing(r, c) ? 0.0 : table.matrix(r, c);
    }
  }
  return LabeledTensor(table.modes, table.level_names, std::move(values), std::move(missing));
}

LabeledTensor aggregate_mode(const LabeledTensor& tensor,
                             std::string_view mode,
                             std::size_t block_size,
                             bool absorb_remainder,
                             std::optional<std::string> new_name) {
  const auto pos = tensor.mode_index(mode);
  const auto& spec = tensor.modes()[pos];
  const std::size_t card = spec.cardinality;
  if (block_size == 0) throw Error(ErrorCode::InvalidMode, "block size must be positive");
  if (block_size > card) {
    throw Error(ErrorCode::BlockTooLarge, "block of " + std::to_string(block_size) +
                                              " exceeds cardinality " + std::to_string(card));
  }
  if (!absorb_remainder && card % block_size != 0) {
    throw Error(ErrorCode::InvalidMode, "block size does not divide the cardinality of '" +
                                            spec.name + "'");
  }
  const std::size_t new_card = card / block_size;
  const auto shape = tensor.shape();
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t i = 0; i < pos; ++i) outer *= shape[i];
  for (std::size_t i = pos + 1; i < shape.size(); ++i) inner *= shape[i];

  std::vector<double> values(outer * new_card * inner, 0.0);
  std::vector<std::uint8_t> missing(values.size(), 1);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < new_card; ++j) {
      const std::size_t begin = j * block_size;
      const std::size_t end = (j + 1 == new_card) ? card : begin + block_size;
      for (std::size_t i = 0; i < inner; ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t l = begin; l < end; ++l) {
          const auto flat = (o * card + l) * inner + i;
          if (!tensor.missing(flat)) {
            sum += tensor.value(flat);
            ++n;
          }
        }
        const auto out = (o * new_card + j) * inner + i;
        if (n > 0) {
          values[out] = sum / static_cast<double>(n);
          missing[out] = 0;
        }
      }
    }
  }

  auto modes = tensor.modes();
  auto names = tensor.level_names();
  if (block_size > 1) {
    if (spec.kind != ModeKind::NonTemporal) {
      modes[pos].frequency_unit = scaled_unit(spec.frequency_unit, block_size);
    }
    modes[pos].cardinality = new_card;
    names[pos] = index_names(new_card);
  }
  if (new_name) modes[pos].name = *new_name;
  return LabeledTensor(std::move(modes), std::move(names), std::move(values), std::move(missing));
}

}  // namespace asca
