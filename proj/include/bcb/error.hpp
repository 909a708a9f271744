#ifndef BCB_ERROR_HPP
#define BCB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcb {

enum class ErrorKind {
  InvalidArgument,
  IllConditioned,
  ZeroNormal,
  UnsupportedDimension,
  NotContinuous,
  NonFinite,
  HypothesisViolated,
  NonTransversal,
  NotSingular,
  MultipleZero,
  NoFixedPoint,
  NoReturn,
  Escaped,
  EmptyCloud,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ZeroNormal: return "ZeroNormal";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::NotContinuous: return "NotContinuous";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NonTransversal: return "NonTransversal";
    case ErrorKind::NotSingular: return "NotSingular";
    case ErrorKind::MultipleZero: return "MultipleZero";
    case ErrorKind::NoFixedPoint: return "NoFixedPoint";
    case ErrorKind::NoReturn: return "NoReturn";
    case ErrorKind::Escaped: return "Escaped";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable failure category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bcb

#endif  // BCB_ERROR_HPP
