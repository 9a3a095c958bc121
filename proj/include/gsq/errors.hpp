#pragma once

#include <stdexcept>
#include <string>

namespace gsq {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define GSQ_DEFINE_ERROR(Name)          \
  struct Name : Error {                 \
    using Error::Error;                 \
  }

GSQ_DEFINE_ERROR(UnsupportedGroupError);
GSQ_DEFINE_ERROR(DegeneracyError);
GSQ_DEFINE_ERROR(NonDominantWeightError);
GSQ_DEFINE_ERROR(LogFailureError);
GSQ_DEFINE_ERROR(DimensionMismatchError);
GSQ_DEFINE_ERROR(CutoffTooSmallError);
GSQ_DEFINE_ERROR(EmptyEigenspaceError);
GSQ_DEFINE_ERROR(NonHermitianError);
GSQ_DEFINE_ERROR(NonImaginaryFormError);
GSQ_DEFINE_ERROR(TimeOffGridError);
GSQ_DEFINE_ERROR(ShapeMismatchError);
GSQ_DEFINE_ERROR(GridMismatchError);
GSQ_DEFINE_ERROR(NonGroupElementError);
GSQ_DEFINE_ERROR(DivergenceError);
GSQ_DEFINE_ERROR(ResourceLimitError);
GSQ_DEFINE_ERROR(IoError);

#undef GSQ_DEFINE_ERROR

/// Config errors carry the offending line (0 when unknown) and field.
struct ConfigParseError : Error {
  ConfigParseError(const std::string& msg, std::size_t line, std::string field)
      : Error(msg), line(line), field(std::move(field)) {}
  std::size_t line;
  std::string field;
};

}  // namespace gsq
