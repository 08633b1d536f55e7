#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tiltbound {

/// Broad failure classes. The CLI maps these onto exit statuses.
enum class ErrorKind {
  invalid_input,  ///< malformed model, bad parameters, wrong side of the mean
  assumption,     ///< positivity-pattern assumptions or irreducibility violated
  numerical,      ///< an iteration failed to converge or a cross-check failed
};

/// Base exception for the library. `module()` names the component that raised
/// it ("matrix_core", "pf", "family", ...), so diagnostics can say where.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

class InputError : public Error {
 public:
  InputError(std::string module, const std::string& what)
      : Error(ErrorKind::invalid_input, std::move(module), what) {}
};

class AssumptionError : public Error {
 public:
  AssumptionError(std::string module, const std::string& what)
      : Error(ErrorKind::assumption, std::move(module), what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string module, const std::string& what)
      : Error(ErrorKind::numerical, std::move(module), what) {}
};

}  // namespace tiltbound
