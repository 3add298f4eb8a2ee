#pragma once

#include <stdexcept>
#include <string>

namespace agentkit {

// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace agentkit
