#pragma once

#include <stdexcept>
#include <string>

namespace needle {

// Every error carries a module-qualified code such as "w1solve.UnbalancedMarginals".
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& message);

  const std::string& module() const { return module_; }
  const std::string& kind() const { return kind_; }
  std::string code() const { return module_ + "." + kind_; }

 private:
  std::string module_;
  std::string kind_;
};

[[noreturn]] void fail(const std::string& module, const std::string& kind,
                       const std::string& message);

}  // namespace needle
