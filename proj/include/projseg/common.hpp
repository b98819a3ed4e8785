#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace projseg {

// Thrown for every contract violation (bad shapes, bad config, bad files).
// Messages always name the offending values.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}
}  // namespace detail

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
    throw Error(detail::cat(std::forward<Args>(args)...));
}

template <typename... Args>
void check(bool cond, Args&&... args) {
    if (!cond) fail(std::forward<Args>(args)...);
}

}  // namespace projseg
