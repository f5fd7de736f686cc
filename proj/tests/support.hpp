#pragma once

#include <functional>
#include <string>

#include "needle/errors.hpp"

namespace needle::testing {

/// Kind of the needle::Error thrown by f, or "" when nothing is thrown.
inline std::string error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace needle::testing
