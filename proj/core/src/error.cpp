#include "asca/error.hpp"

namespace asca {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::UnmappableTimestamp: return "UnmappableTimestamp";
    case ErrorCode::UnknownSeries: return "UnknownSeries";
    case ErrorCode::EvolutionModeInColumns: return "EvolutionModeInColumns";
    case ErrorCode::EmptyColumnModes: return "EmptyColumnModes";
    case ErrorCode::UnknownMode: return "UnknownMode";
    case ErrorCode::BlockTooLarge: return "BlockTooLarge";
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateFactor: return "DegenerateFactor";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotProperlyNested: return "NotProperlyNested";
    case ErrorCode::InteractionWithNestedPair: return "InteractionWithNestedPair";
    case ErrorCode::DuplicateFactorName: return "DuplicateFactorName";
    case ErrorCode::UnknownFactor: return "UnknownFactor";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NoResidualDf: return "NoResidualDf";
    case ErrorCode::UnknownTerm: return "UnknownTerm";
    case ErrorCode::KZero: return "KZero";
    case ErrorCode::RTooLarge: return "RTooLarge";
    case ErrorCode::ComponentOutOfRange: return "ComponentOutOfRange";
    case ErrorCode::AllRowsDropped: return "AllRowsDropped";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::ZeroSingularValue: return "ZeroSingularValue";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::EmptyLevel: return "EmptyLevel";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace asca
