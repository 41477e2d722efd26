#pragma once

#include <stdexcept>

namespace hpcwatch {

/// Base for every error the library raises. Callers that only need a message
/// can catch this; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hpcwatch
