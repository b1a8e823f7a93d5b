#pragma once

#include <stdexcept>
#include <string>

namespace qamp {

// Domain error raised by any module. The message is prefixed with the module
// name so the CLI can surface it as-is.
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

}  // namespace qamp
