#pragma once

#include <stdexcept>
#include <string>

namespace landsim {

struct DegeneratePose : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularConfiguration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllegalInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace landsim
