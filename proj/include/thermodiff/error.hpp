#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thermodiff {

enum class ErrorCode {
  NonPositiveParameter,
  ConstantsOverrideInNaturalUnits,
  NegativeTime,
  NonPositiveVariance,
  NonPositiveDt,
  NegativeIndex,
  IndexBelowOne,
  EmptyGrid,
  InvalidGrid,
  GridTooSmall,
  BackwardEvolution,
  TooFewParticles,
  TooFewSteps,
  InvalidScheme,
  TooFewSamples,
  InvalidNeighborOrder,
  DegenerateSamples,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::ConstantsOverrideInNaturalUnits: return "ConstantsOverrideInNaturalUnits";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NonPositiveDt: return "NonPositiveDt";
    case ErrorCode::NegativeIndex: return "NegativeIndex";
    case ErrorCode::IndexBelowOne: return "IndexBelowOne";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::BackwardEvolution: return "BackwardEvolution";
    case ErrorCode::TooFewParticles: return "TooFewParticles";
    case ErrorCode::TooFewSteps: return "TooFewSteps";
    case ErrorCode::InvalidScheme: return "InvalidScheme";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidNeighborOrder: return "InvalidNeighborOrder";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
  }
  return "Unknown";
}

/// Domain error raised by every thermodiff operation. `subject()` names the
/// offending field (e.g. "temperature", "dt") when there is one, and
/// `index()` carries the grid position for errors raised inside a batch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subject_(std::move(subject)),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::string subject_;
  std::optional<std::size_t> index_;
};

}  // namespace thermodiff
