#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netinf {

enum class ErrorKind {
  invalid_size,
  invalid_parameter,
  index,
  ordering,
  domain,
  format,
  nondifferentiable,
  initialization,
  numeric,
  singularity,
  spec,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_size: return "invalid-size";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::index: return "index";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::domain: return "domain";
    case ErrorKind::format: return "format";
    case ErrorKind::nondifferentiable: return "nondifferentiable";
    case ErrorKind::initialization: return "initialization";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::spec: return "spec";
  }
  return "unknown";
}

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace netinf
