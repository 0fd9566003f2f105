#pragma once

#include <stdexcept>
#include <string>

namespace advfold {

/// Error type thrown by every operation in this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace advfold
