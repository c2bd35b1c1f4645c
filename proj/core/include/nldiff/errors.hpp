#pragma once

#include <stdexcept>
#include <string>

namespace nldiff {

/// A field or trajectory contains non-finite data.
class InvalidState : public std::runtime_error {
public:
  explicit InvalidState(const std::string& what) : std::runtime_error(what) {}
};

/// A coefficient exceeded the blow-up threshold during integration.
class BlowUpError : public std::runtime_error {
public:
  BlowUpError(double t, int mode, double value, std::string component_ = "u")
      : std::runtime_error("blow-up in component " + component_ + " at t=" + std::to_string(t) +
                           ", mode " + std::to_string(mode) + ", |coeff|=" + std::to_string(value)),
        time(t), mode_index(mode), coeff(value), component(std::move(component_)) {}
  double time;
  int mode_index;
  double coeff;
  std::string component;
};

/// No admissible constants exist for the requested configuration.
class CertificateError : public std::runtime_error {
public:
  explicit CertificateError(const std::string& violated_bound)
      : std::runtime_error("no certificate: " + violated_bound), bound(violated_bound) {}
  std::string bound;
};

/// Adaptive step-size control underflowed.
class StiffnessError : public std::runtime_error {
public:
  explicit StiffnessError(double t)
      : std::runtime_error("step size underflow at t=" + std::to_string(t)), time(t) {}
  double time;
};

/// Config file rejected; carries the offending position.
class ConfigParseError : public std::runtime_error {
public:
  ConfigParseError(int line_, int column_, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_) + ", column " +
                           std::to_string(column_) + ": " + message),
        line(line_), column(column_) {}
  int line;
  int column;
};

}  // namespace nldiff
