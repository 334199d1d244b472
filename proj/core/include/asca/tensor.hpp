#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asca/calendar.hpp"

namespace asca {

enum class ModeKind { Cyclostationary, Evolution, NonTemporal };

std::string_view to_string(ModeKind kind);
std::optional<ModeKind> parse_mode_kind(std::string_view text);

// One tensor mode, named "frequency of the period": an hour-of-day mode has
// frequency_unit "hour" and period_unit "day". Evolution modes that count
// periods from an origin use period_unit "span".
struct CalendarModeSpec {
  std::string name;
  std::string frequency_unit;
  std::string period_unit;
  std::size_t cardinality = 1;
  ModeKind kind = ModeKind::Cyclostationary;
};

// Throws Error(InvalidMode) when the mode is inconsistent. Cyclic modes need
// cardinality == period / frequency; for a year period the quotient is floored
// and trailing days fold into the last level (e.g. 52 weeks or 26 fortnights).
void validate_mode(const CalendarModeSpec& mode);

// Throws when more than one evolution mode is declared or names repeat.
void validate_modes(std::span<const CalendarModeSpec> modes);

struct Record {
  Timestamp timestamp;
  std::string series;
  std::optional<double> value;  // nullopt: missing measurement
};

// Reads "timestamp,series,value" text (',', ';' or tab delimited, detected from
// the header). An empty value field is a missing measurement.
std::vector<Record> read_records(std::istream& in);

struct CalendarOptions {
  // Name of the non-temporal mode that series ids map onto; when absent all
  // records must carry the same series id.
  std::optional<std::string> series_mode;
  // Fixed level order for the series mode; defaults to sorted unique ids.
  std::vector<std::string> series_levels;
  // Start of "span" modes; defaults to midnight of the earliest record.
  std::optional<Timestamp> origin;
  // Zero-based day of year on which year-period cycles start.
  int year_start_day = 0;
};

struct BuildReport {
  std::size_t records = 0;
  std::size_t leap_day_records_dropped = 0;
  std::size_t missing_cells = 0;
};

// Dense multiway array in row-major order (first mode slowest). Missing cells
// hold NaN and are flagged in the mask; every other cell is finite.
class LabeledTensor {
 public:
  LabeledTensor(std::vector<CalendarModeSpec> modes,
                std::vector<std::vector<std::string>> level_names,
                std::vector<double> values,
                std::vector<std::uint8_t> missing);

  const std::vector<CalendarModeSpec>& modes() const { return modes_; }
  const std::vector<std::vector<std::string>>& level_names() const { return level_names_; }
  std::vector<std::size_t> shape() const;
  std::size_t size() const { return values_.size(); }

  std::size_t mode_index(std::string_view name) const;  // throws UnknownMode
  std::size_t flat_index(std::span<const std::size_t> index) const;

  double value(std::size_t flat) const { return values_[flat]; }
  bool missing(std::size_t flat) const { return missing_[flat] != 0; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& missing_mask() const { return missing_; }

 private:
  std::vector<CalendarModeSpec> modes_;
  std::vector<std::vector<std::string>> level_names_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

LabeledTensor build_tensor(std::span<const Record> records,
                           std::vector<CalendarModeSpec> modes,
                           const CalendarOptions& options = {},
                           BuildReport* report = nullptr);

struct LevelLabel {
  std::string mode;
  std::size_t level = 0;
  std::string name;

  friend bool operator==(const LevelLabel&, const LevelLabel&) = default;
};

using LabelTuple = std::vector<LevelLabel>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

std::string join_label(const LabelTuple& label, char sep = '/');

// Observation x variable matrix obtained by unfolding a tensor.
struct DesignTable {
  Eigen::MatrixXd matrix;
  std::vector<LabelTuple> row_labels;
  std::vector<LabelTuple> col_labels;
  MaskMatrix missing;
  std::vector<std::string> row_modes;
  std::vector<std::string> col_modes;
  // Modes of the source tensor in their original order.
  std::vector<CalendarModeSpec> modes;
  std::vector<std::vector<std::string>> level_names;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  std::size_t missing_count() const { return static_cast<std::size_t>(missing.count()); }
};

DesignTable unfold(const LabeledTensor& tensor,
                   std::span<const std::string> row_modes,
                   std::span<const std::string> col_modes);

// Inverse of unfold; requires every row and column of the unfolding.
LabeledTensor fold(const DesignTable& table);

// Averages consecutive blocks of a mode. Missing entries are skipped; a block
// with nothing observed stays missing. With absorb_remainder the trailing
// cardinality % block_size levels join the final block.
LabeledTensor aggregate_mode(const LabeledTensor& tensor,
                             std::string_view mode,
                             std::size_t block_size,
                             bool absorb_remainder,
                             std::optional<std::string> new_name = std::nullopt);

}  // namespace asca
