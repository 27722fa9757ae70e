#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lulc {

enum class ErrorKind {
    shape,
    catalog,
    format,
    io,
    empty_sample,
    neighborhood,
    coverage,
    config,
    batch_size,
    label,
    mode,
    compatibility,
    data,
    numeric,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can map it to
// an exit code (io/format are input errors, everything else is a contract
// violation).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::shape: return "shape";
        case ErrorKind::catalog: return "catalog";
        case ErrorKind::format: return "format";
        case ErrorKind::io: return "io";
        case ErrorKind::empty_sample: return "empty-sample";
        case ErrorKind::neighborhood: return "out-of-neighborhood";
        case ErrorKind::coverage: return "coverage";
        case ErrorKind::config: return "config";
        case ErrorKind::batch_size: return "batch-size";
        case ErrorKind::label: return "label";
        case ErrorKind::mode: return "mode";
        case ErrorKind::compatibility: return "compatibility";
        case ErrorKind::data: return "data";
        case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

}  // namespace lulc
