#pragma once

#include <stdexcept>
#include <string>

namespace nfsar {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass { config, numeric, io };

/// Base exception for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)), message_(what) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

  /// Same class and kind with `prefix` prepended to the message.
  Error with_context(const std::string& prefix) const {
    return Error(cls_, kind_, prefix + message_);
  }

 private:
  ErrorClass cls_;
  std::string kind_;
  std::string message_;
};

#define NFSAR_DEFINE_ERROR(Name, Class)                                \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what)                             \
        : Error(ErrorClass::Class, #Name, what) {}                     \
  };

NFSAR_DEFINE_ERROR(ConfigError, config)
NFSAR_DEFINE_ERROR(InvalidArgument, config)
NFSAR_DEFINE_ERROR(GridMismatch, config)
NFSAR_DEFINE_ERROR(ShapeError, config)
NFSAR_DEFINE_ERROR(TooSmall, config)
NFSAR_DEFINE_ERROR(MissingCheckpoint, config)
NFSAR_DEFINE_ERROR(NyquistViolation, config)
NFSAR_DEFINE_ERROR(SamplingError, config)
NFSAR_DEFINE_ERROR(OutOfBounds, config)
NFSAR_DEFINE_ERROR(EmptyScatterers, config)
NFSAR_DEFINE_ERROR(EmptyMask, numeric)
NFSAR_DEFINE_ERROR(ZeroSignal, numeric)
NFSAR_DEFINE_ERROR(Divergence, numeric)
NFSAR_DEFINE_ERROR(NonFinite, numeric)
NFSAR_DEFINE_ERROR(NoCrossing, numeric)
NFSAR_DEFINE_ERROR(IoError, io)

#undef NFSAR_DEFINE_ERROR

}  // namespace nfsar
