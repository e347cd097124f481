#pragma once

#include <stdexcept>
#include <string>

namespace sellkit {

enum class errc : int {
    ok = 0,
    invalid_arg = 1,
    overflow = 2,
    shape_mismatch = 3,
    pattern_mismatch = 4,
    io = 5,
    capacity = 6,
    state = 7,
    alloc = 8,
    transport = 9,
    unsupported = 10,
    numeric = 11,
};

const char* errc_name(errc c);

/// Exception carrying a library error code. The C API maps these to plain codes.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

#define SK_REQUIRE(cond, code, msg)            \
    do {                                       \
        if (!(cond)) ::sellkit::fail(code, msg); \
    } while (0)

} // namespace sellkit
