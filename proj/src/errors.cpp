#include "needle/errors.hpp"

namespace needle {

Error::Error(std::string module, std::string kind, const std::string& message)
    : std::runtime_error(module + "." + kind + ": " + message),
      module_(std::move(module)),
      kind_(std::move(kind)) {}

void fail(const std::string& module, const std::string& kind,
          const std::string& message) {
  throw Error(module, kind, message);
}

}  // namespace needle
