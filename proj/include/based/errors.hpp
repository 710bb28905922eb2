#pragma once

#include <stdexcept>
#include <string>

namespace based {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BASED_DECLARE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

BASED_DECLARE_ERROR(IoError)
BASED_DECLARE_ERROR(FormatError)
BASED_DECLARE_ERROR(DimensionError)
BASED_DECLARE_ERROR(ParamError)
BASED_DECLARE_ERROR(HighpassError)
BASED_DECLARE_ERROR(SizeError)
BASED_DECLARE_ERROR(DataError)
BASED_DECLARE_ERROR(ConfigError)
BASED_DECLARE_ERROR(DegenerateError)
BASED_DECLARE_ERROR(ConvergenceError)
BASED_DECLARE_ERROR(LengthError)
BASED_DECLARE_ERROR(IdenticalError)
BASED_DECLARE_ERROR(ValidationError)

#undef BASED_DECLARE_ERROR

/// Malformed model file. `location` is a JSON pointer to the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string location, const std::string& what)
      : Error("schema error at '" + location + "': " + what), location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

/// Wraps an extractor failure with the name of the feature that raised it.
class FeatureError : public Error {
 public:
  FeatureError(std::string feature, const std::string& what)
      : Error(feature + ": " + what), feature_(std::move(feature)) {}

  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

}  // namespace based
