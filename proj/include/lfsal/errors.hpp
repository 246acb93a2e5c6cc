#ifndef LFSAL_ERRORS_HPP
#define LFSAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lfsal {

enum class ErrorKind { config, data, numerical, bounds, alignment, io };

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::bounds: return "bounds";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base of every error raised by the library. `kind()` lets the CLI print a
/// machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};
struct BoundsError : Error {
  explicit BoundsError(const std::string& what) : Error(ErrorKind::bounds, what) {}
};
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& what) : Error(ErrorKind::alignment, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace lfsal

#endif  // LFSAL_ERRORS_HPP
