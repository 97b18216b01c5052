#pragma once

#include <stdexcept>
#include <string>

namespace sztbss {

/// Raised for precondition violations, degenerate inputs and I/O failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(what);
}

} // namespace detail
} // namespace sztbss
