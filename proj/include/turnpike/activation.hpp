#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace turnpike {

/// Elementwise activation. Every kind satisfies sigma(0) = 0 exactly.
enum class ActivationKind { Tanh };

inline double activate(ActivationKind kind, double s) {
  switch (kind) {
    case ActivationKind::Tanh: return std::tanh(s);
  }
  throw std::logic_error("activate: unknown activation kind");
}

/// sigma'(s) expressed through the already computed value y = sigma(s).
/// For tanh: sigma' = 1 - y^2.
inline double activate_derivative_from_value(ActivationKind kind, double y) {
  switch (kind) {
    case ActivationKind::Tanh: return 1.0 - y * y;
  }
  throw std::logic_error("activate_derivative_from_value: unknown activation kind");
}

inline std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Tanh: return "tanh";
  }
  throw std::logic_error("to_string: unknown activation kind");
}

inline ActivationKind activation_from_string(const std::string& name) {
  if (name == "tanh") return ActivationKind::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

}  // namespace turnpike
