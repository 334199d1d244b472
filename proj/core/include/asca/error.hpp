#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asca {

enum class ErrorCode {
  // tensor
  DuplicateCell,
  UnmappableTimestamp,
  UnknownSeries,
  EvolutionModeInColumns,
  EmptyColumnModes,
  UnknownMode,
  BlockTooLarge,
  InvalidMode,
  ParseError,
  // design
  DegenerateFactor,
  LevelOutOfRange,
  ShapeMismatch,
  NotProperlyNested,
  InteractionWithNestedPair,
  DuplicateFactorName,
  UnknownFactor,
  // factorization / inference
  NonFiniteInput,
  NoResidualDf,
  UnknownTerm,
  KZero,
  // sca
  RTooLarge,
  ComponentOutOfRange,
  // preprocess
  AllRowsDropped,
  EmptyColumn,
  // diagnostics
  ZeroSingularValue,
  EmptyInput,
  ConstantSeries,
  SeriesTooShort,
  EmptyLevel,
  // pipeline
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace asca
