#pragma once

#include <stdexcept>
#include <string>

namespace dsnfp {

enum class errc {
    malformed_header,
    truncated_data,
    unsupported_maxval,
    bad_magic,
    version_mismatch,
    dimension_mismatch,
    empty_set,
    degenerate_input,
    insufficient_data,
    monotone_decreasing,
    all_non_positive,
    invalid_param,
    io_error,
};

const char* errc_name(errc c) noexcept;

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace dsnfp
