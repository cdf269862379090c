#pragma once

#include <stdexcept>
#include <string>

namespace signface {

/// Base of every error raised by the library. `kind()` is a stable tag used
/// by the CLI to pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SIGNFACE_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  }

SIGNFACE_DEFINE_ERROR(MalformedInput);
SIGNFACE_DEFINE_ERROR(EmptySequence);
SIGNFACE_DEFINE_ERROR(ShapeError);
SIGNFACE_DEFINE_ERROR(InvalidSegmentation);
SIGNFACE_DEFINE_ERROR(DegenerateSplit);
SIGNFACE_DEFINE_ERROR(EmptyDataset);
SIGNFACE_DEFINE_ERROR(ProfileMismatch);
SIGNFACE_DEFINE_ERROR(UnsupportedVersion);
SIGNFACE_DEFINE_ERROR(IoFailure);
SIGNFACE_DEFINE_ERROR(ConfigError);

#undef SIGNFACE_DEFINE_ERROR

}  // namespace signface
