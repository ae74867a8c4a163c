#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace regionsim {

/// Base-station identifier, dense in [0, n_cells) within one topology.
using CellId = std::uint32_t;

/// MME/AMF instance identifier. Never reused within a run once retired.
using RegionId = std::uint32_t;

/// User-equipment identifier, unique per run.
using UeId = std::uint32_t;

inline constexpr RegionId kNoRegion = std::numeric_limits<RegionId>::max();
inline constexpr CellId kNoCell = std::numeric_limits<CellId>::max();
inline constexpr UeId kNoUe = std::numeric_limits<UeId>::max();

enum class ErrorCode {
  DisconnectedGraph,
  MalformedSpec,
  UnknownCell,
  ParseError,
  NonAdjacentHandover,
  UnassignedCell,
  RetiredRegion,
  NoCandidate,
  NotAssigned,
  EmptyRegionOverflow,
  InsufficientCapacity,
  LastRegion,
  Infeasible,
  TooLarge,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Single exception type for the whole library; the code discriminates the
/// named error conditions so tests can match on them precisely.
class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::UnknownCell: return "UnknownCell";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonAdjacentHandover: return "NonAdjacentHandover";
    case ErrorCode::UnassignedCell: return "UnassignedCell";
    case ErrorCode::RetiredRegion: return "RetiredRegion";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::NotAssigned: return "NotAssigned";
    case ErrorCode::EmptyRegionOverflow: return "EmptyRegionOverflow";
    case ErrorCode::InsufficientCapacity: return "InsufficientCapacity";
    case ErrorCode::LastRegion: return "LastRegion";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace regionsim
